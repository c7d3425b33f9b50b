# © 2026 initOS GmbH
# License LGPL-3.0 or later (https://www.gnu.org/licenses/lgpl.html)

import logging
from typing import List, Sequence

import numpy as np
from scipy.special import xlogy

from .buyer import TieRule, demand_matrix
from .exceptions import (
    ConfigError,
    DegenerateBuyer,
    MaxIterationsError,
    NonpositivePrice,
    UnsupportedGood,
)
from .market import BuyerProfile, MarketInstance, PriceVector

_logger = logging.getLogger(__name__)


class SolverParams:
    """Tolerances and iteration budgets of the offline solvers.

    `gap_tol` .. relative duality gap for proportional response
    `feas_tol` .. relative slack allowed on capacities and budgets
    `clear_tol` .. relative slack for market clearing of priced goods
    `price_eps` .. prices below this count as zero
    `step_a`, `step_b` .. subgradient step schedule a / (b + k)
    `dual_tol` .. relative price movement at which the subgradient stops
    `price_floor` .. smallest price the subgradient method may reach
    """

    Fields = {
        "max_iters": int,
        "gap_tol": float,
        "feas_tol": float,
        "clear_tol": float,
        "price_eps": float,
        "step_a": float,
        "step_b": float,
        "dual_tol": float,
        "price_floor": float,
        "window": int,
    }

    def __init__(
        self,
        max_iters: int = 100000,
        gap_tol: float = 1e-8,
        feas_tol: float = 1e-8,
        clear_tol: float = 1e-6,
        price_eps: float = 1e-9,
        step_a: float = 2.0,
        step_b: float = 10.0,
        dual_tol: float = 1e-5,
        price_floor: float = 1e-12,
        window: int = 50,
    ):
        self.max_iters = int(max_iters)
        self.gap_tol = float(gap_tol)
        self.feas_tol = float(feas_tol)
        self.clear_tol = float(clear_tol)
        self.price_eps = float(price_eps)
        self.step_a = float(step_a)
        self.step_b = float(step_b)
        self.dual_tol = float(dual_tol)
        self.price_floor = float(price_floor)
        self.window = int(window)

        for name in self.Fields:
            if not getattr(self, name) > 0:
                raise ConfigError(f"Solver parameter {name} must be positive", name)

    def __repr__(self) -> str:
        return f"<SolverParams: {self.to_json()}>"

    def copy(self, **changes) -> "SolverParams":
        data = self.to_json()
        data.update(changes)
        return SolverParams(**data)

    def to_json(self) -> dict:
        return {name: getattr(self, name) for name in self.Fields}

    @classmethod
    def from_json(cls, data: dict, base: "SolverParams" = None) -> "SolverParams":
        unknown = set(data).difference(cls.Fields)
        if unknown:
            raise ConfigError(f"Unknown solver keys: {sorted(unknown)}", "oracle")

        values = (base or cls()).to_json()
        for name, value in data.items():
            try:
                values[name] = cls.Fields[name](value)
            except (TypeError, ValueError) as e:
                raise ConfigError(f"Invalid value for {name}: {value!r}", name) from e
        return cls(**values)

    @classmethod
    def from_settings(cls, settings) -> "SolverParams":
        data = {}
        for name in cls.Fields:
            value = settings.opt(f"solver.{name}")
            if value is not None:
                data[name] = value
        return cls.from_json(data)


class EquilibriumSolution:
    def __init__(
        self,
        allocations,
        prices,
        primal_value: float,
        dual_value: float,
        gap: float,
        iterations: int,
        unsupported=(),
        converged: bool = True,
    ):
        self.allocations = np.asarray(allocations, dtype=float)
        self.prices = np.asarray(prices, dtype=float)
        self.primal_value = float(primal_value)
        self.dual_value = float(dual_value)
        self.gap = float(gap)
        self.iterations = int(iterations)
        # Goods nobody values, priced at zero
        self.unsupported = tuple(int(j) for j in unsupported)
        self.converged = converged

    def __repr__(self) -> str:
        return (
            f"<Equilibrium: value={self.primal_value:.6g} gap={self.gap:.3g} "
            f"iterations={self.iterations}>"
        )

    def to_json(self) -> dict:
        return {
            "allocations": self.allocations.tolist(),
            "prices": self.prices.tolist(),
            "primal_value": self.primal_value,
            "dual_value": self.dual_value,
            "gap": self.gap,
            "iterations": self.iterations,
            "unsupported": list(self.unsupported),
            "converged": self.converged,
        }


class CEInput:
    """Discrete type distribution for the certainty equivalent program"""

    def __init__(self, budgets, utilities, probs, d):
        self.budgets = np.asarray(budgets, dtype=float)
        self.utilities = np.atleast_2d(np.asarray(utilities, dtype=float))
        self.probs = np.asarray(probs, dtype=float)
        self.d = np.asarray(d, dtype=float)

        if not len(self.budgets) == len(self.utilities) == len(self.probs):
            raise ValueError("budgets, utilities and probs must have K entries")
        if self.utilities.shape[1] != len(self.d):
            raise ValueError("utilities and d disagree on the number of goods")
        if np.any(self.probs < 0) or abs(self.probs.sum() - 1) > 1e-12:
            raise ValueError("probs must be nonnegative and sum to one")
        if np.any(self.d <= 0):
            raise ValueError("d must be positive")

    @property
    def K(self) -> int:
        return len(self.probs)

    @property
    def m(self) -> int:
        return len(self.d)

    def with_capacity(self, d) -> "CEInput":
        return CEInput(self.budgets, self.utilities, self.probs, d)


def _buyer_arrays(buyers):
    if isinstance(buyers, MarketInstance):
        return buyers.budgets, buyers.utilities
    budgets = np.array([b.budget for b in buyers], dtype=float)
    utilities = np.vstack([b.utilities for b in buyers])
    return budgets, utilities


def eg_dual_value(prices, budgets, utilities, capacities) -> float:
    """Dual of the Eisenberg-Gale program. Goods nobody values may be priced 0.

    sum_t w_t log w_t - sum_t w_t log(min_j p_j / u_tj) + p.c - sum_t w_t
    """
    prices = np.asarray(prices, dtype=float)
    utilities = np.asarray(utilities, dtype=float)
    positive = utilities > 0
    if not np.all(positive.any(axis=1)):
        raise DegenerateBuyer("A buyer without positive utility has no dual term")

    with np.errstate(divide="ignore"):
        ratios = np.where(positive, prices / np.where(positive, utilities, 1), np.inf)
    beta = ratios.min(axis=1)
    if np.any(beta <= 0):
        return np.inf

    return float(
        np.sum(xlogy(budgets, budgets))
        - np.sum(budgets * np.log(beta))
        + prices @ np.asarray(capacities, dtype=float)
        - np.sum(budgets)
    )


def dual_objective(prices: PriceVector, instance: MarketInstance) -> float:
    prices = np.asarray(prices, dtype=float)
    if np.any(prices <= 0):
        raise NonpositivePrice("The dual objective needs strictly positive prices")
    return eg_dual_value(
        prices, instance.budgets, instance.utilities, instance.capacities
    )


def saa_dual_objective(
    prices: PriceVector, buyers: Sequence[BuyerProfile], d
) -> float:
    """Sample average dual D_n(p), equal to dual_objective / n for d = c / n"""
    prices = np.asarray(prices, dtype=float)
    if np.any(prices <= 0):
        raise NonpositivePrice("The dual objective needs strictly positive prices")

    budgets, utilities = _buyer_arrays(buyers)
    n = len(budgets)
    d = np.asarray(d, dtype=float)
    # The capacity term of the pooled dual is n * p.d
    return eg_dual_value(prices, budgets, utilities, n * d) / n


def _proportional_response(budgets, utilities, capacities, params: SolverParams):
    """Proportional response fixed point iteration.

    Bids b_tj = w_t u_tj x_tj / (u_t . x_t), prices p_j = sum_t b_tj / c_j and
    allocations x_tj = b_tj / p_j. The allocation stays feasible and every
    budget is spent, so the duality gap is the only convergence measure.
    """
    budgets = np.asarray(budgets, dtype=float)
    utilities = np.asarray(utilities, dtype=float)
    capacities = np.asarray(capacities, dtype=float)
    n, m = utilities.shape

    degenerate = np.flatnonzero(~np.any(utilities > 0, axis=1))
    if degenerate.size:
        raise DegenerateBuyer(f"Buyers {degenerate.tolist()} have no positive utility")

    supported = np.any(utilities > 0, axis=0)
    unsupported = np.flatnonzero(~supported)
    if unsupported.size:
        _logger.info("Goods %s have no buyer and get price 0", unsupported.tolist())

    uniform = np.broadcast_to(capacities / n, (n, m))
    x = uniform.copy()
    best = None
    sum_w_log_w = float(np.sum(xlogy(budgets, budgets)))

    # Dual terms only involve the supported goods, where prices stay positive
    u_sup = utilities[:, supported]
    c_sup = capacities[supported]
    with np.errstate(divide="ignore"):
        inv_u = np.where(u_sup > 0, 1 / np.where(u_sup > 0, u_sup, 1), np.inf)

    for k in range(1, params.max_iters + 1):
        value = np.einsum("tj,tj->t", utilities, x)
        stale = value <= 0
        if np.any(stale):
            x[stale] = uniform[stale]
            value[stale] = utilities[stale] @ (capacities / n)

        bids = utilities * x
        bids *= (budgets / value)[:, None]
        spent = bids.sum(axis=0)
        prices = spent / capacities
        with np.errstate(divide="ignore", invalid="ignore"):
            x = np.where(spent > 0, bids * (capacities / spent), 0.0)

        value = np.einsum("tj,tj->t", utilities, x)
        with np.errstate(divide="ignore"):
            primal = float(budgets @ np.log(value))

        p_sup = prices[supported]
        if np.any(p_sup <= 0):
            dual = np.inf
        else:
            beta = (p_sup * inv_u).min(axis=1)
            dual = (
                sum_w_log_w
                - float(budgets @ np.log(beta))
                + float(p_sup @ c_sup)
                - float(budgets.sum())
            )
        gap = dual - primal

        if best is None or gap < best.gap:
            best = EquilibriumSolution(
                x, prices, primal, dual, gap, k, unsupported, converged=False
            )

        if gap <= params.gap_tol * (1 + abs(primal)):
            best.converged = True
            _logger.debug("Proportional response converged after %d iterations", k)
            return best

    _logger.warning(
        "Proportional response stopped after %d iterations with gap %g",
        params.max_iters,
        best.gap,
    )
    return best


def solve_eg_primal(
    instance: MarketInstance, params: SolverParams = None
) -> EquilibriumSolution:
    """Solve the Eisenberg-Gale program of a realized market"""
    params = params or SolverParams()
    solution = _proportional_response(
        instance.budgets, instance.utilities, instance.capacities, params
    )
    if not solution.converged:
        raise MaxIterationsError(
            f"No equilibrium within {params.max_iters} iterations", solution=solution
        )
    return solution


def solve_certainty_equivalent(
    ce: CEInput, params: SolverParams = None
) -> EquilibriumSolution:
    """Solve the certainty equivalent program CE(d) over K types.

    With y_k = q_k z_k the program is an Eisenberg-Gale program with budgets
    q_k w_k and capacities d, so the same fixed point iteration applies.
    """
    params = params or SolverParams()
    live = ce.probs > 0
    supported = np.any(ce.utilities[live] > 0, axis=0)
    if not np.all(supported):
        goods = np.flatnonzero(~supported).tolist()
        raise UnsupportedGood(f"Goods {goods} have no type with positive utility")

    q = ce.probs[live]
    weights = q * ce.budgets[live]
    pooled = _proportional_response(weights, ce.utilities[live], ce.d, params)

    prices = pooled.prices
    z = np.zeros((ce.K, ce.m))
    z[live] = pooled.allocations / q[:, None]
    for k in np.flatnonzero(~live):
        if np.any(ce.utilities[k] > 0):
            z[k] = demand_matrix(ce.budgets[k : k + 1], ce.utilities[k : k + 1], prices)[0]

    # Objective in terms of z differs from the pooled one by a constant
    shift = float(weights @ np.log(q))
    solution = EquilibriumSolution(
        z,
        prices,
        pooled.primal_value - shift,
        pooled.dual_value - shift,
        pooled.gap,
        pooled.iterations,
        converged=pooled.converged,
    )
    if not solution.converged:
        raise MaxIterationsError(
            f"No CE solution within {params.max_iters} iterations", solution=solution
        )
    return solution


def solve_dual_subgradient(
    buyers: Sequence[BuyerProfile],
    d,
    params: SolverParams = None,
    p0: PriceVector = None,
    rule=TieRule.LOWEST_INDEX,
) -> PriceVector:
    """Minimize the sample average dual D_n(p) by a subgradient method.

    The subgradient d - mean_t x_t(p) is scaled per good by p_j / d_j, steps
    follow a / (b + k) and prices never fall below `price_floor`. Iterates
    are averaged over the last `window` steps before every checkpoint
    k = window * 2^i and the method stops once two consecutive averages
    differ by less than `dual_tol` (relative). The average is returned.
    """
    params = params or SolverParams()
    budgets, utilities = _buyer_arrays(buyers)
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("d must be positive")

    supported = np.any(utilities > 0, axis=0)
    if p0 is None:
        p0 = np.mean(budgets) * d / np.sum(d * d)
    p0 = np.asarray(p0, dtype=float)
    if np.any(p0 <= 0):
        raise NonpositivePrice("The subgradient method needs a positive start")

    prices = np.where(supported, p0, 0.0)
    u_sup, d_sup = utilities[:, supported], d[supported]
    p = prices[supported].copy()

    checkpoint, previous = params.window, None
    recent = np.zeros_like(p)
    best, best_value = p.copy(), np.inf
    for k in range(params.max_iters):
        x = demand_matrix(budgets, u_sup, p, rule)
        g = d_sup - x.mean(axis=0)
        step = np.clip(params.step_a / (params.step_b + k) * g / d_sup, -0.5, 0.5)
        p = np.maximum(p * (1 - step), params.price_floor)

        if k + 1 > checkpoint - params.window:
            recent += p
        if k + 1 < checkpoint:
            continue

        average = recent / params.window
        recent[:] = 0
        prices[supported] = average
        value = _saa_value(prices, budgets, utilities, d)
        if value < best_value:
            best, best_value = average, value

        if previous is not None:
            moved = np.max(np.abs(average - previous) / average)
            if moved <= params.dual_tol:
                _logger.debug("Dual subgradient converged after %d iterations", k + 1)
                return prices.copy()
        previous, checkpoint = average, checkpoint * 2

    prices[supported] = best
    raise MaxIterationsError(
        f"Dual subgradient did not settle within {params.max_iters} iterations",
        prices=prices,
    )


def _saa_value(prices, budgets, utilities, d) -> float:
    n = len(budgets)
    return eg_dual_value(prices, budgets, utilities, n * d) / n


def certify_equilibrium(
    solution: EquilibriumSolution,
    budgets,
    utilities,
    capacities,
    params: SolverParams = None,
) -> List[str]:
    """Names of the equilibrium conditions the solution violates"""
    params = params or SolverParams()
    x = solution.allocations
    p = solution.prices
    budgets = np.asarray(budgets, dtype=float)
    capacities = np.asarray(capacities, dtype=float)
    scale_c = np.maximum(1.0, capacities)
    used = x.sum(axis=0)

    failed = []
    if np.any(x < 0) or np.any(used > capacities + params.feas_tol * scale_c):
        failed.append("feasibility")

    slack = params.gap_tol * (1 + abs(solution.primal_value))
    if solution.dual_value < solution.primal_value - slack:
        failed.append("weak-duality")

    priced = p > params.price_eps
    if np.any(np.abs(used - capacities)[priced] > params.clear_tol * scale_c[priced]):
        failed.append("complementary-slackness")

    active = np.any(np.asarray(utilities) > 0, axis=1)
    spent = x @ p
    scale_w = np.maximum(1.0, budgets)
    if np.any((np.abs(spent - budgets) > params.feas_tol * scale_w)[active]):
        failed.append("budget-exhaustion")

    return failed

# © 2026 initOS GmbH
# License LGPL-3.0 or later (https://www.gnu.org/licenses/lgpl.html)

import logging
import math
from typing import List, Optional

import numpy as np

from .distributions import DiscreteDistribution, DistributionSpec, sample_market
from .exceptions import TypeMismatch
from .market import BuyerProfile, MarketInstance, PriceVector
from .solver import (
    CEInput,
    SolverParams,
    solve_certainty_equivalent,
    solve_dual_subgradient,
    solve_eg_primal,
)

_logger = logging.getLogger(__name__)

PriceFloorBreach = "price-floor-breach"
Switch = "switch"

ConsumptionModes = ("allocation_from_ce", "best_response")
UpdateRules = ("additive", "multiplicative")


class PolicyEvent:
    def __init__(self, t: int, kind: str, data=None):
        self.t = t
        self.kind = kind
        self.data = data or {}

    def __repr__(self) -> str:
        return f"<PolicyEvent: {self.kind} at t={self.t}>"

    def to_json(self) -> dict:
        return {"t": self.t, "kind": self.kind, **self.data}


class PricingPolicy:
    """Posts a price before every arrival and learns from the consumption.

    The simulation calls `next_price(t)` before buyer t arrives, asks
    `allocation_for(t, buyer)` whether the policy prescribes the consumption
    and finally reports the realized consumption with `observe`.
    """

    name = None

    def __init__(self, p1):
        self.prices = np.array(p1, dtype=float)
        self.consumed = np.zeros(len(self.prices))
        self.t = 1
        self.events: List[PolicyEvent] = []
        self.breached = False

    @property
    def m(self) -> int:
        return len(self.prices)

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__}: t={self.t} p={self.prices.tolist()}>"

    def next_price(self, t: int) -> PriceVector:
        return self.prices.copy()

    def allocation_for(self, t: int, buyer: BuyerProfile) -> Optional[np.ndarray]:
        return None

    def observe(self, t: int, allocation, buyer: BuyerProfile = None):
        allocation = np.asarray(allocation, dtype=float)
        self.consumed += allocation
        self.t = t + 1
        self._update(t, allocation, buyer)

    def _update(self, t, allocation, buyer):
        pass

    def event(self, t, kind, **data):
        self.events.append(PolicyEvent(t, kind, data))


class StaticPricePolicy(PricingPolicy):
    name = "static_eq"

    def __init__(self, prices):
        super().__init__(prices)
        self.static_prices = self.prices.copy()


def static_equilibrium_policy(
    spec: DistributionSpec,
    d,
    sample_count: int,
    rng,
    params: SolverParams = None,
    method: str = "saa",
) -> StaticPricePolicy:
    """Post the expected equilibrium price for the whole horizon.

    `saa` minimizes the sample average dual over `sample_count` draws while
    `ce` solves the certainty equivalent program of a discrete spec.
    """
    if method == "ce":
        if not isinstance(spec, DiscreteDistribution):
            raise ValueError("The ce method needs a discrete distribution")
        prices = solve_certainty_equivalent(spec.to_ce_input(d), params).prices
    elif method == "saa":
        buyers = sample_market(spec, sample_count, rng)
        prices = solve_dual_subgradient(buyers, d, params)
    else:
        raise ValueError(f"Unknown static pricing method {method!r}")

    _logger.debug("Static equilibrium price %s", prices.tolist())
    return StaticPricePolicy(prices)


class AdaptiveCEPolicy(PricingPolicy):
    """Re-solve the certainty equivalent program on the average remaining
    capacity and fall back to the static price once it leaves the band"""

    name = "adaptive_ce"

    def __init__(
        self,
        ce: CEInput,
        n: int,
        delta=None,
        mode: str = "allocation_from_ce",
        params: SolverParams = None,
    ):
        if mode not in ConsumptionModes:
            raise ValueError(f"mode must be one of {ConsumptionModes}")

        self.ce = ce
        self.n = int(n)
        self.d = ce.d
        self.delta = self.d / 2 if delta is None else np.asarray(delta, dtype=float)
        if np.any(self.delta <= 0) or np.any(self.delta >= self.d):
            raise ValueError("Need 0 < delta < d")

        self.mode = mode
        self.params = params or SolverParams()
        self.fallback = solve_certainty_equivalent(ce, self.params)
        self.current = self.fallback
        super().__init__(self.fallback.prices)

        self.remaining = self.n * self.d
        self.average_remaining = self.d.copy()
        self.switched = False
        self.tau = None
        self.max_price = float(self.prices.max())
        self._types = {
            t_key: k
            for k, t_key in enumerate(
                (w, tuple(u.tolist())) for w, u in zip(ce.budgets, ce.utilities)
            )
            if ce.probs[k] > 0
        }

    def type_of(self, buyer: BuyerProfile) -> int:
        try:
            return self._types[buyer.key]
        except KeyError as e:
            raise TypeMismatch(f"{buyer} is not a type of the distribution") from e

    def allocation_for(self, t, buyer):
        k = self.type_of(buyer)
        if self.mode == "allocation_from_ce":
            return self.current.allocations[k].copy()
        return None

    def _update(self, t, allocation, buyer):
        self.remaining = self.remaining - allocation
        if self.switched or t >= self.n:
            return

        average = self.remaining / (self.n - t)
        self.average_remaining = average
        low, high = self.d - self.delta, self.d + self.delta
        if np.any(average < low) or np.any(average > high):
            self.switched = True
            self.tau = t + 1
            self.current = self.fallback
            self.prices = self.fallback.prices.copy()
            self.event(t + 1, Switch, average=average.tolist())
            _logger.debug("Leaving the capacity band at t=%d", t + 1)
            return

        self.current = solve_certainty_equivalent(
            self.ce.with_capacity(average), self.params
        )
        self.prices = self.current.prices.copy()
        self.max_price = max(self.max_price, float(self.prices.max()))


def adaptive_ce_policy(
    ce: CEInput, n: int, delta=None, mode="allocation_from_ce", params=None
) -> AdaptiveCEPolicy:
    return AdaptiveCEPolicy(ce, n, delta, mode, params)


class RevealedPreferencePolicy(PricingPolicy):
    """Price update from observed consumption only. The additive rule is
    p - gamma (d - x) without projection, the multiplicative rule is
    p exp(-gamma (d - x))"""

    def __init__(
        self,
        d,
        n: int,
        gamma_scale: float = 0.01,
        rule: str = "additive",
        p1=None,
        gamma: float = None,
    ):
        if rule not in UpdateRules:
            raise ValueError(f"rule must be one of {UpdateRules}")
        if gamma_scale <= 0:
            raise ValueError("gamma_scale must be positive")

        d = np.asarray(d, dtype=float)
        super().__init__(np.ones(len(d)) if p1 is None else p1)
        if np.any(self.prices <= 0):
            raise ValueError("p1 must be positive")

        self.d = d
        self.n = int(n)
        self.rule = rule
        self.gamma = gamma if gamma is not None else gamma_scale / math.sqrt(self.n)
        self.initial_prices = self.prices.copy()

    @property
    def name(self):
        return f"rp_{self.rule}"

    def _update(self, t, allocation, buyer):
        if self.rule == "multiplicative":
            self.prices = self.prices * np.exp(-self.gamma * (self.d - allocation))
            return

        self.prices = self.prices - self.gamma * (self.d - allocation)
        if np.any(self.prices <= 0) and not self.breached:
            self.breached = True
            goods = np.flatnonzero(self.prices <= 0).tolist()
            self.event(t + 1, PriceFloorBreach, goods=goods)
            _logger.warning("Prices of goods %s dropped to zero at t=%d", goods, t + 1)


def revealed_preference_policy(
    d, n, gamma_scale=0.01, rule="additive", p1=None
) -> RevealedPreferencePolicy:
    return RevealedPreferencePolicy(d, n, gamma_scale, rule, p1)


def saa_breakpoints(n: int, delta: float = 2.0) -> List[int]:
    """Geometric re-solve times floor(delta^k) below n, followed by n + 1"""
    if not 1 < delta <= 2:
        raise ValueError("delta must lie in (1, 2]")

    count = math.ceil(math.log(n) / math.log(delta) - 1e-12) if n > 1 else 0
    points = []
    for k in range(1, count):
        t = min(math.floor(delta**k), n)
        if t not in points:
            points.append(t)
    return points + [n + 1]


class DynamicSAAPolicy(PricingPolicy):
    """Re-solve the sampled Eisenberg-Gale program on the revealed buyers at
    geometrically spaced times with capacities scaled to the prefix"""

    name = "dynamic_saa"

    def __init__(self, c, n: int, delta: float = 2.0, p1=None, params=None):
        c = np.asarray(c, dtype=float)
        super().__init__(np.ones(len(c)) if p1 is None else p1)
        self.c = c
        self.n = int(n)
        self.params = params or SolverParams()
        self.breakpoints = saa_breakpoints(self.n, delta)
        self._solve_at = set(self.breakpoints[:-1])
        self.revealed: List[BuyerProfile] = []

    def _update(self, t, allocation, buyer):
        if buyer is None:
            raise ValueError("The dynamic SAA policy needs the revealed buyer")

        self.revealed.append(buyer)
        if t not in self._solve_at:
            return

        instance = MarketInstance(t / self.n * self.c, self.revealed)
        solution = solve_eg_primal(instance, self.params)
        priced = solution.prices > self.params.price_eps
        self.prices = np.where(priced, solution.prices, self.prices)
        _logger.debug("SAA prices at t=%d: %s", t, self.prices.tolist())


def dynamic_saa_policy(c, n, delta=2.0, p1=None, params=None) -> DynamicSAAPolicy:
    return DynamicSAAPolicy(c, n, delta, p1, params)

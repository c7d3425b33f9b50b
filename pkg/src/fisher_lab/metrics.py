# © 2026 initOS GmbH
# License LGPL-3.0 or later (https://www.gnu.org/licenses/lgpl.html)

import logging
import math
from typing import Iterable, List, Optional, Tuple

import numpy as np
from scipy.stats import linregress

from .market import BuyerProfile
from .policies import PolicyEvent
from .utils import geometric_mean

_logger = logging.getLogger(__name__)

ZeroUtilityEvent = "zero-utility"


class SimulationTrace:
    """Prices, consumption and buyers of one simulated horizon"""

    def __init__(self, n: int, m: int):
        self.n = n
        self.m = m
        self.prices = np.zeros((n, m))
        self.allocations = np.zeros((n, m))
        self.budgets = np.zeros(n)
        self.utilities = np.zeros((n, m))
        self.kinds: List[Optional[int]] = [None] * n
        self.cumulative = np.zeros(m)
        self.events = []
        # Price after the last observation, p^{n+1}
        self.final_prices = None
        self.tau = None
        self.length = 0

    def __len__(self):
        return self.length

    def __repr__(self) -> str:
        return f"<SimulationTrace: {self.length}/{self.n} steps>"

    def record(self, t: int, prices, allocation, buyer: BuyerProfile):
        i = t - 1
        self.prices[i] = prices
        self.allocations[i] = allocation
        self.budgets[i] = buyer.budget
        self.utilities[i] = buyer.utilities
        self.kinds[i] = buyer.kind
        self.cumulative += allocation
        self.length = t

    @property
    def complete(self) -> bool:
        return self.length == self.n

    def realized_utilities(self) -> np.ndarray:
        k = self.length
        return np.einsum("tj,tj->t", self.utilities[:k], self.allocations[:k])

    def to_json(self) -> dict:
        k = self.length
        return {
            "prices": self.prices[:k].tolist(),
            "allocations": self.allocations[:k].tolist(),
            "budgets": self.budgets[:k].tolist(),
            "kinds": self.kinds[:k],
            "final_prices": None if self.final_prices is None else list(self.final_prices),
            "tau": self.tau,
            "events": [e.to_json() for e in self.events],
        }


class MetricsReport:
    Columns = (
        "regret",
        "u_star",
        "u_online",
        "violation_l2",
        "violation_linf",
        "nsw_ratio",
        "max_price",
        "min_price",
        "tau",
        "breach",
    )

    def __init__(
        self,
        u_online=None,
        u_star=None,
        violation_l2=None,
        violation_linf=None,
        max_price=None,
        min_price=None,
        tau=None,
        breach=False,
        n=None,
    ):
        self.u_online = u_online
        self.u_star = u_star
        self.violation_l2 = violation_l2
        self.violation_linf = violation_linf
        self.max_price = max_price
        self.min_price = min_price
        self.tau = tau
        self.breach = breach
        self.n = n

    @property
    def regret(self):
        if self.u_star is None or self.u_online is None:
            return None
        return self.u_star - self.u_online

    @property
    def nsw_ratio(self):
        if self.regret is None or not self.n:
            return None
        return nsw_ratio(self.u_star, self.u_online, self.n)

    def __repr__(self) -> str:
        return f"<MetricsReport: regret={self.regret} l2={self.violation_l2}>"

    def to_json(self) -> dict:
        return {name: getattr(self, name) for name in self.Columns}


def online_objective(trace: SimulationTrace) -> float:
    """Budget weighted log utility of the realized consumption. A buyer who
    values something but ends up with zero utility makes it -inf"""
    k = trace.length
    values = trace.realized_utilities()
    active = np.any(trace.utilities[:k] > 0, axis=1)

    starved = active & (values <= 0)
    if np.any(starved):
        buyers = (np.flatnonzero(starved) + 1).tolist()
        trace.events.append(PolicyEvent(buyers[0], ZeroUtilityEvent, {"buyers": buyers}))
        return -math.inf
    return float(trace.budgets[:k][active] @ np.log(values[active]))


def regret(trace: SimulationTrace, oracle) -> float:
    """Offline optimum minus the realized objective. May be negative"""
    value = getattr(oracle, "primal_value", oracle)
    return float(value) - online_objective(trace)


def constraint_violation(trace: SimulationTrace, c) -> Tuple[float, float, np.ndarray]:
    excess = np.maximum(trace.cumulative - np.asarray(c, dtype=float), 0)
    return float(np.linalg.norm(excess)), float(np.max(excess, initial=0)), excess


def nsw_ratio(oracle_value: float, online_value: float, n: int) -> float:
    """NSW*/NSW for unit budgets, exp((U* - U) / n)"""
    with np.errstate(over="ignore"):
        return float(np.exp((oracle_value - online_value) / n))


def nash_social_welfare(trace: SimulationTrace) -> float:
    """Geometric mean of the realized utilities"""
    return geometric_mean(trace.realized_utilities())


def potential_series(trace: SimulationTrace, d) -> np.ndarray:
    """V_t = p^t . d for every step, followed by the final price if known"""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("The potential needs a positive d")

    prices = trace.prices[: trace.length]
    if trace.final_prices is not None:
        prices = np.vstack([prices, trace.final_prices])
    return prices @ d


def potential_threshold(w_min: float, d) -> float:
    """Below this price level the additive update never decreases p . d"""
    d = np.asarray(d, dtype=float)
    return float(w_min * d.min() / np.sum(d * d))


def _points(points, positive) -> Tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(list(points), dtype=float)
    if arr.ndim != 2 or len(arr) < 3:
        raise ValueError("A slope fit needs at least 3 points")
    n, values = arr[:, 0], arr[:, 1]
    if np.any(n <= 0):
        raise ValueError("n must be positive")
    if positive and np.any(values <= 0):
        raise ValueError("A log-log fit needs positive values")
    return n, values


def fit_loglog_slope(points: Iterable[Tuple[float, float]]) -> Tuple[float, float, float]:
    """Least squares line through (log n, log value): slope, intercept, r^2"""
    n, values = _points(points, positive=True)
    fit = linregress(np.log(n), np.log(values))
    return float(fit.slope), float(fit.intercept), float(fit.rvalue**2)


def fit_semilog_slope(points: Iterable[Tuple[float, float]]) -> Tuple[float, float, float]:
    """Least squares line through (log n, value): slope, intercept, r^2"""
    n, values = _points(points, positive=False)
    fit = linregress(np.log(n), values)
    return float(fit.slope), float(fit.intercept), float(fit.rvalue**2)


def price_step_ratios(trace: SimulationTrace, n: int) -> np.ndarray:
    """||p^{t+1} - p^t|| (n - t) over the steps before the band was left"""
    last = trace.length if trace.tau is None else min(trace.length, trace.tau - 1)
    prices = trace.prices[:last]
    steps = np.linalg.norm(np.diff(prices, axis=0), axis=1)
    t = np.arange(1, len(steps) + 1)
    return steps * (n - t)


def lipschitz_constant(ratios, warmup: int = 100) -> float:
    """Constant C of ||p^{t+1} - p^t|| <= C / (n - t) from the first steps"""
    ratios = np.asarray(ratios, dtype=float)[:warmup]
    return float(ratios.max()) if ratios.size else 0.0


def telescoping_residual(trace: SimulationTrace, capacities, gamma: float) -> float:
    """Deviation from sum_t x_t - c = (p^{n+1} - p^1) / gamma of the
    additive update"""
    if trace.final_prices is None or not trace.length:
        raise ValueError("The trace has no final price")
    drift = (np.asarray(trace.final_prices) - trace.prices[0]) / gamma
    residual = trace.cumulative - np.asarray(capacities, dtype=float) - drift
    return float(np.max(np.abs(residual)))

# © 2026 initOS GmbH
# License LGPL-3.0 or later (https://www.gnu.org/licenses/lgpl.html)

import logging
from typing import List, Tuple

import numpy as np
from scipy.special import xlogy

from .exceptions import ConfigError
from .market import BuyerProfile, ValidationReport, support_report
from .solver import CEInput

_logger = logging.getLogger(__name__)

PROB_TOL = 1e-9


class RngStream:
    """Seeded generator for one replication.

    The key (seed, namespace, stream) fully determines the draws, independent
    of how many other streams exist. The harness uses the horizon n as
    namespace for buyer arrivals and namespace 0 for experiment wide samples.
    """

    def __init__(self, seed: int, stream: int = 0, namespace: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        self.namespace = int(namespace)
        sequence = np.random.SeedSequence(
            self.seed, spawn_key=(self.namespace, self.stream)
        )
        self.generator = np.random.default_rng(sequence)

    def __repr__(self) -> str:
        return f"<RngStream: {self.seed}/{self.namespace}/{self.stream}>"


def _generator(rng):
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"Expected RngStream or numpy Generator, got {type(rng)}")


def _probabilities(values, field) -> np.ndarray:
    probs = np.asarray(values, dtype=float)
    if probs.ndim != 1 or not probs.size:
        raise ConfigError(f"{field} must be a non-empty list", field)
    if np.any(probs < 0):
        raise ConfigError(f"{field} must be nonnegative", field)
    if abs(probs.sum() - 1) > PROB_TOL:
        raise ConfigError(f"{field} sum to {probs.sum():g} instead of 1", field)
    return probs


def _vector(values, field, m=None) -> np.ndarray:
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{field} must be numeric", field) from e
    if arr.ndim == 0 and m is not None:
        arr = np.full(m, float(arr))
    if arr.ndim != 1 or not np.all(np.isfinite(arr)):
        raise ConfigError(f"{field} must be a finite vector", field)
    if m is not None and len(arr) != m:
        raise ConfigError(f"{field} needs {m} entries", field)
    return arr


def _check_keys(data, allowed, field):
    unknown = set(data).difference(allowed)
    if unknown:
        raise ConfigError(f"Unknown {field} keys: {sorted(unknown)}", field)


class DistributionSpec:
    """Base of the i.i.d. arrival distributions of (budget, utilities)"""

    variant = None

    def __init__(self, d, name: str = None):
        self.d = _vector(d, "d")
        if np.any(self.d <= 0):
            raise ConfigError("d must be positive", "d")
        self.name = name

    @property
    def m(self) -> int:
        return len(self.d)

    @property
    def expected_budget(self) -> float:
        raise NotImplementedError()

    def sample(self, n: int, gen) -> Tuple[np.ndarray, np.ndarray, List]:
        """Draw budgets, utilities and type indices of n buyers"""
        raise NotImplementedError()

    def check(self) -> ValidationReport:
        raise NotImplementedError()

    def is_counterexample(self) -> bool:
        return False

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__}: m={self.m} {self.name or ''}>"

    def to_json(self) -> dict:
        raise NotImplementedError()

    @classmethod
    def from_json(cls, data: dict) -> "DistributionSpec":
        if not isinstance(data, dict):
            raise ConfigError("distribution must be an object", "distribution")

        variant = data.get("variant")
        for sub in (DiscreteDistribution, IndependentUniform):
            if sub.variant == variant:
                return sub.from_json(data)
        raise ConfigError(f"Unknown distribution variant {variant!r}", "variant")


class DiscreteDistribution(DistributionSpec):
    """Finite support of K buyer types drawn with probabilities q"""

    variant = "discrete"

    def __init__(self, types, probs, d, name: str = None):
        super().__init__(d, name)
        self.probs = _probabilities(probs, "probs")
        self.types = [
            t if isinstance(t, BuyerProfile) else BuyerProfile(*t) for t in types
        ]
        if len(self.types) != len(self.probs):
            raise ConfigError("types and probs differ in length", "probs")
        for k, t in enumerate(self.types):
            if t.m != self.m:
                raise ConfigError(f"Type {k} has {t.m} utilities, expected {self.m}", "types")

        self.budgets = np.array([t.budget for t in self.types])
        self.utilities = np.vstack([t.utilities for t in self.types])

    @property
    def K(self) -> int:
        return len(self.types)

    @property
    def expected_budget(self) -> float:
        return float(self.probs @ self.budgets)

    def sample(self, n, gen):
        kinds = gen.choice(self.K, size=n, p=self.probs)
        return self.budgets[kinds], self.utilities[kinds], kinds.tolist()

    def check(self) -> ValidationReport:
        return support_report(self.budgets, self.utilities, mask=self.probs > 0)

    def is_counterexample(self) -> bool:
        plain = {(1.0, (1.0, 0.0)), (1.0, (0.0, 1.0))}
        return (
            self.K == 2
            and {t.key for t in self.types} == plain
            and np.allclose(self.probs, 0.5, rtol=0, atol=PROB_TOL)
        )

    def to_ce_input(self, d=None) -> CEInput:
        return CEInput(
            self.budgets, self.utilities, self.probs, self.d if d is None else d
        )

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "name": self.name,
            "types": [t.to_json() for t in self.types],
            "probs": self.probs.tolist(),
            "d": self.d.tolist(),
        }

    @classmethod
    def from_json(cls, data):
        _check_keys(data, {"variant", "name", "types", "probs", "d"}, "distribution")
        for key in ("types", "probs", "d"):
            if key not in data:
                raise ConfigError(f"Missing distribution field {key}", key)

        types = [BuyerProfile.from_json(t) for t in data["types"]]
        return cls(types, data["probs"], data["d"], name=data.get("name"))


class IndependentUniform(DistributionSpec):
    """Budget from a finite support, utilities independently uniform per good"""

    variant = "independent_uniform"

    def __init__(
        self,
        budgets,
        budget_probs,
        utility_low,
        utility_high,
        d,
        name: str = None,
    ):
        super().__init__(d, name)
        self.budget_values = _vector(budgets, "budgets")
        self.budget_probs = _probabilities(budget_probs, "budget_probs")
        if len(self.budget_values) != len(self.budget_probs):
            raise ConfigError("budgets and budget_probs differ in length", "budget_probs")
        if np.any(self.budget_values <= 0):
            raise ConfigError("budgets must be positive", "budgets")

        self.utility_low = _vector(utility_low, "utility_low", self.m)
        self.utility_high = _vector(utility_high, "utility_high", self.m)
        if np.any(self.utility_low < 0) or np.any(self.utility_high < self.utility_low):
            raise ConfigError("Need 0 <= utility_low <= utility_high", "utility_low")

    @property
    def expected_budget(self) -> float:
        return float(self.budget_probs @ self.budget_values)

    def sample(self, n, gen):
        index = gen.choice(len(self.budget_values), size=n, p=self.budget_probs)
        utilities = gen.uniform(self.utility_low, self.utility_high, size=(n, self.m))
        return self.budget_values[index], utilities, [None] * n

    def check(self) -> ValidationReport:
        live = self.budget_probs > 0
        goods_supported = self.utility_high > 0
        positive = bool(np.all(self.utility_low > 0))
        buyers_positive = [positive and w > 0 for w in self.budget_values]

        violations = [("unsupported-good", int(j)) for j in np.flatnonzero(~goods_supported)]
        for k in np.flatnonzero(live):
            if not buyers_positive[k]:
                violations.append(("nonpositive-buyer", int(k)))
        return ValidationReport(goods_supported, buyers_positive, violations)

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "name": self.name,
            "budgets": self.budget_values.tolist(),
            "budget_probs": self.budget_probs.tolist(),
            "utility_low": self.utility_low.tolist(),
            "utility_high": self.utility_high.tolist(),
            "d": self.d.tolist(),
        }

    @classmethod
    def from_json(cls, data):
        keys = ("budgets", "budget_probs", "utility_low", "utility_high", "d")
        _check_keys(data, {"variant", "name", *keys}, "distribution")
        for key in keys:
            if key not in data:
                raise ConfigError(f"Missing distribution field {key}", key)
        return cls(*(data[k] for k in keys), name=data.get("name"))


def sample_market(spec: DistributionSpec, n: int, rng) -> List[BuyerProfile]:
    """Draw a whole realization of n buyers in one call"""
    budgets, utilities, kinds = spec.sample(n, _generator(rng))
    return [BuyerProfile(w, u, k) for w, u, k in zip(budgets, utilities, kinds)]


def sample_user(spec: DistributionSpec, rng) -> BuyerProfile:
    return sample_market(spec, 1, rng)[0]


def counterexample_spec(epsilon: float = 0.0) -> DiscreteDistribution:
    """Two goods, unit budgets and the utilities (1, e) or (e, 1) with
    probability 1/2 each. With e = 0 static pricing violates capacities by
    order sqrt(n)"""
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    types = [(1.0, (1.0, epsilon)), (1.0, (epsilon, 1.0))]
    return DiscreteDistribution(types, [0.5, 0.5], [1.0, 1.0], name="counterexample")


def f2_benchmark_spec() -> IndependentUniform:
    """Five goods with capacity 10 per user, budgets 2, 5 or 10 and
    utilities uniform on [5, 10]"""
    return IndependentUniform(
        [2.0, 5.0, 10.0],
        [1 / 3, 1 / 3, 1 / 3],
        5.0,
        10.0,
        [10.0] * 5,
        name="benchmark",
    )


def closed_form_optimum_counterexample(n: int, s: int) -> float:
    """Offline optimum of a counterexample realization with s buyers of the
    first type and capacities (n, n)"""
    if not 0 <= s <= n:
        raise ValueError(f"Need 0 <= s <= n, got s={s} n={n}")
    return float(xlogy(n, n) - (xlogy(s, s) + xlogy(n - s, n - s)))


def check_assumptions(spec: DistributionSpec) -> ValidationReport:
    """Check the spec symbolically, not on samples"""
    return spec.check()

# © 2026 initOS GmbH
# License LGPL-3.0 or later (https://www.gnu.org/licenses/lgpl.html)

import json
import logging
import sys
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .exceptions import ConfigError
from .utils import JSONEncoder

_logger = logging.getLogger(__name__)

# Prices are plain float vectors. Nonnegativity is not enforced because the
# additive revealed preference update may push them below zero.
PriceVector = np.ndarray

CheckLevels = ("assumption1", "assumption3", "both")


def _frozen(values, name):
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


class BuyerProfile:
    """One arriving user: a budget and a utility per unit of every good"""

    __slots__ = ("budget", "utilities", "kind")

    def __init__(self, budget: float, utilities: Iterable[float], kind: int = None):
        budget = float(budget)
        utilities = _frozen(utilities, "utilities")
        if not budget > 0:
            raise ValueError(f"budget must be positive, got {budget}")
        if np.any(utilities < 0):
            raise ValueError("utilities must be nonnegative")

        self.budget = budget
        self.utilities = utilities
        # Index of the distribution type this buyer was drawn from, if any
        self.kind = kind

    @property
    def m(self) -> int:
        return len(self.utilities)

    @property
    def key(self) -> tuple:
        return (self.budget, tuple(self.utilities.tolist()))

    def is_degenerate(self) -> bool:
        return not np.any(self.utilities > 0)

    def __eq__(self, other):
        if not isinstance(other, BuyerProfile):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self) -> str:
        return f"<Buyer: w={self.budget:g} u={self.utilities.tolist()}>"

    def to_json(self) -> dict:
        return {"budget": self.budget, "utilities": self.utilities.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "BuyerProfile":
        unknown = set(data).difference({"budget", "utilities"})
        if unknown:
            raise ConfigError(f"Unknown buyer keys: {sorted(unknown)}", "buyers")
        try:
            return cls(data["budget"], data["utilities"])
        except KeyError as e:
            raise ConfigError(f"Missing buyer field {e}", e.args[0]) from e
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid buyer: {e}", "buyers") from e


class MarketInstance:
    """A realized market: capacities c and the sequence of n buyers"""

    def __init__(self, capacities: Iterable[float], buyers: Sequence[BuyerProfile]):
        self.capacities = _frozen(capacities, "capacities")
        self.buyers = tuple(buyers)

        if not self.buyers:
            raise ValueError("A market needs at least one buyer")
        if np.any(self.capacities <= 0):
            raise ValueError("capacities must be positive")
        for t, buyer in enumerate(self.buyers):
            if buyer.m != self.m:
                raise ValueError(f"Buyer {t} has {buyer.m} utilities, expected {self.m}")

        self.per_user_capacity = self.capacities / self.n
        self.per_user_capacity.setflags(write=False)

        self._budgets = np.array([b.budget for b in self.buyers])
        self._budgets.setflags(write=False)
        self._utilities = np.vstack([b.utilities for b in self.buyers])
        self._utilities.setflags(write=False)

    @property
    def m(self) -> int:
        return len(self.capacities)

    @property
    def n(self) -> int:
        return len(self.buyers)

    @property
    def budgets(self) -> np.ndarray:
        return self._budgets

    @property
    def utilities(self) -> np.ndarray:
        return self._utilities

    def __len__(self):
        return self.n

    def __iter__(self):
        return iter(self.buyers)

    def __repr__(self) -> str:
        return f"<Market: m={self.m} n={self.n}>"

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "capacities": self.capacities.tolist(),
            "buyers": [b.to_json() for b in self.buyers],
        }

    @classmethod
    def from_json(cls, data: dict) -> "MarketInstance":
        allowed = {"m", "n", "capacities", "buyers", "allocations", "prices", "gap"}
        unknown = set(data).difference(allowed)
        if unknown:
            raise ConfigError(f"Unknown instance keys: {sorted(unknown)}", "instance")

        for key in ("capacities", "buyers"):
            if key not in data:
                raise ConfigError(f"Missing instance field {key}", key)

        buyers = [BuyerProfile.from_json(b) for b in data["buyers"]]
        try:
            instance = cls(data["capacities"], buyers)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid instance: {e}", "capacities") from e

        if "m" in data and data["m"] != instance.m:
            raise ConfigError(f"m={data['m']} but {instance.m} capacities", "m")
        if "n" in data and data["n"] != instance.n:
            raise ConfigError(f"n={data['n']} but {instance.n} buyers", "n")
        return instance


class ValidationReport:
    def __init__(self, goods_supported, buyers_positive, violations=None):
        self.goods_supported = tuple(bool(x) for x in goods_supported)
        self.buyers_positive = tuple(bool(x) for x in buyers_positive)
        # Pairs of (kind, index)
        self.violations = list(violations or [])

    @property
    def ok(self) -> bool:
        return not self.violations

    def __eq__(self, other):
        if not isinstance(other, ValidationReport):
            return NotImplemented
        return self.to_json() == other.to_json()

    def __repr__(self) -> str:
        return f"<ValidationReport: {len(self.violations)} violations>"

    def to_json(self) -> dict:
        return {
            "goods_supported": list(self.goods_supported),
            "buyers_positive": list(self.buyers_positive),
            "violations": [list(v) for v in self.violations],
        }


def support_report(
    budgets, utilities, check_level="both", mask=None
) -> ValidationReport:
    """Shared check of Assumption 1 (every good has a buyer with positive
    utility) and Assumption 3 (strictly positive budgets and utilities).
    `mask` .. rows taking part in the checks (e.g. types with q_k > 0)"""
    if check_level not in CheckLevels:
        raise ValueError(f"check_level must be one of {CheckLevels}")

    budgets = np.asarray(budgets, dtype=float)
    utilities = np.atleast_2d(np.asarray(utilities, dtype=float))
    if mask is None:
        mask = np.ones(len(budgets), dtype=bool)

    goods_supported = np.any(utilities[mask] > 0, axis=0)
    buyers_positive = (np.min(utilities, axis=1) > 0) & (budgets > 0)

    violations = []
    for t in np.flatnonzero(mask & ~np.any(utilities > 0, axis=1)):
        violations.append(("degenerate-buyer", int(t)))

    if check_level in ("assumption1", "both"):
        for j in np.flatnonzero(~goods_supported):
            violations.append(("unsupported-good", int(j)))

    if check_level in ("assumption3", "both"):
        for t in np.flatnonzero(mask & ~buyers_positive):
            violations.append(("nonpositive-buyer", int(t)))

    return ValidationReport(goods_supported, buyers_positive, violations)


def validate_instance(instance: MarketInstance, check_level="both") -> ValidationReport:
    """Report which assumptions the realized instance satisfies. Never raises"""
    return support_report(instance.budgets, instance.utilities, check_level)


def normalize_capacities(instance: MarketInstance) -> MarketInstance:
    """Rescale to unit capacities. A unit of the new good j is c_j units of the
    old one, so u'_tj = u_tj c_j and prices map back with p_j = p'_j / c_j.
    The Eisenberg-Gale objective value is unchanged"""
    c = instance.capacities
    if np.all(c == 1.0):
        return instance

    buyers = [
        BuyerProfile(b.budget, b.utilities * c, kind=b.kind) for b in instance.buyers
    ]
    return MarketInstance(np.ones(instance.m), buyers)


def restore_prices(prices: PriceVector, capacities) -> PriceVector:
    """Map prices of a normalized instance back to the original units"""
    return np.asarray(prices, dtype=float) / np.asarray(capacities, dtype=float)


def restore_allocations(allocations, capacities) -> np.ndarray:
    """Map allocations of a normalized instance back to the original units"""
    return np.asarray(allocations, dtype=float) * np.asarray(capacities, dtype=float)


def load_instance(filename) -> MarketInstance:
    try:
        if filename == "-":
            data = json.load(sys.stdin)
        else:
            with open(filename, encoding="utf-8") as fp:
                data = json.load(fp)
    except OSError as e:
        raise ConfigError(f"Can't read {filename}: {e}", "instance") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON in {filename}: {e}", "instance") from e

    if not isinstance(data, dict):
        raise ConfigError("An instance must be a JSON object", "instance")
    return MarketInstance.from_json(data)


def save_instance(instance: MarketInstance, filename, extra: Optional[dict] = None):
    data = instance.to_json()
    data.update(extra or {})
    if filename == "-":
        json.dump(data, sys.stdout, indent=2, cls=JSONEncoder)
        sys.stdout.write("\n")
    else:
        with open(filename, "w+", encoding="utf-8") as fp:
            json.dump(data, fp, indent=2, cls=JSONEncoder)


def as_buyers(budgets, utilities, kinds: List[int] = None) -> List[BuyerProfile]:
    kinds = kinds if kinds is not None else [None] * len(budgets)
    return [BuyerProfile(w, u, k) for w, u, k in zip(budgets, utilities, kinds)]

# © 2026 initOS GmbH
# License LGPL-3.0 or later (https://www.gnu.org/licenses/lgpl.html)

import enum
import logging
from typing import Tuple

import numpy as np

from .exceptions import NonpositivePrice, ZeroUtility
from .market import BuyerProfile, PriceVector

_logger = logging.getLogger(__name__)

RTOL_TIE = 1e-12


class TieRule(enum.Enum):
    LOWEST_INDEX = "lowest_index"
    UNIFORM_SPLIT = "uniform_split"

    @classmethod
    def parse(cls, value) -> "TieRule":
        if isinstance(value, cls):
            return value
        try:
            return cls(value)
        except ValueError as e:
            names = ", ".join(r.value for r in cls)
            raise ValueError(f"Unknown tie rule {value!r}, expected one of {names}") from e


def _check_prices(prices) -> np.ndarray:
    prices = np.asarray(prices, dtype=float)
    if np.any(prices <= 0):
        raise NonpositivePrice(f"Demand is unbounded at prices {prices.tolist()}")
    return prices


def _best_mask(utilities, prices, rtol) -> np.ndarray:
    ratios = utilities / prices
    best = ratios.max(axis=-1, keepdims=True)
    if np.any(best <= 0):
        raise ZeroUtility("A buyer without positive utility has no demand")
    return (ratios >= best * (1 - rtol)) & (ratios > 0)


def bang_per_buck_set(utilities, prices: PriceVector, rtol=RTOL_TIE) -> Tuple[int]:
    """Indices of the goods maximizing u_j / p_j"""
    prices = _check_prices(prices)
    mask = _best_mask(np.asarray(utilities, dtype=float), prices, rtol)
    return tuple(int(j) for j in np.flatnonzero(mask))


def demand_matrix(
    budgets, utilities, prices: PriceVector, rule=TieRule.LOWEST_INDEX, rtol=RTOL_TIE
) -> np.ndarray:
    """Best responses of many buyers at once as an n x m matrix"""
    rule = TieRule.parse(rule)
    prices = _check_prices(prices)
    budgets = np.asarray(budgets, dtype=float)
    mask = _best_mask(np.atleast_2d(utilities), prices, rtol)

    x = np.zeros(mask.shape)
    if rule is TieRule.LOWEST_INDEX:
        rows = np.arange(len(mask))
        chosen = np.argmax(mask, axis=1)
        x[rows, chosen] = budgets / prices[chosen]
    else:
        share = budgets / mask.sum(axis=1)
        x = mask * share[:, None] / prices
    return x


def optimal_bundle(
    buyer: BuyerProfile, prices: PriceVector, rule=TieRule.LOWEST_INDEX, rtol=RTOL_TIE
) -> np.ndarray:
    """Affordable utility maximizing bundle which spends the whole budget"""
    x = demand_matrix([buyer.budget], buyer.utilities[None, :], prices, rule, rtol)
    return x[0]


def indirect_utility(buyer: BuyerProfile, prices: PriceVector) -> float:
    """Utility of the optimal bundle: w / min_j (p_j / u_j)"""
    prices = _check_prices(prices)
    best = np.max(buyer.utilities / prices)
    if best <= 0:
        raise ZeroUtility("A buyer without positive utility has no demand")
    return buyer.budget * float(best)

# © 2026 initOS GmbH
# License LGPL-3.0 or later (https://www.gnu.org/licenses/lgpl.html)


class FisherLabError(Exception):
    """Base class of all errors raised by the package"""


class ConfigError(FisherLabError, ValueError):
    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class NonpositivePrice(FisherLabError, ValueError):
    pass


class ZeroUtility(FisherLabError, ValueError):
    pass


class DegenerateBuyer(FisherLabError, ValueError):
    pass


class UnsupportedGood(FisherLabError, ValueError):
    pass


class TypeMismatch(FisherLabError, ValueError):
    pass


class MaxIterationsError(FisherLabError, RuntimeError):
    """Raised when an iterative solver runs out of iterations.
    `solution` .. best equilibrium iterate (EG/CE solvers)
    `prices` .. best price iterate (dual subgradient)"""

    def __init__(self, message, solution=None, prices=None):
        super().__init__(message)
        self.solution = solution
        self.prices = prices

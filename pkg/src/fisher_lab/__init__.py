# © 2026 initOS GmbH
# License LGPL-3.0 or later (https://www.gnu.org/licenses/lgpl.html)

from .buyer import TieRule, bang_per_buck_set, indirect_utility, optimal_bundle
from .distributions import (
    DiscreteDistribution,
    DistributionSpec,
    IndependentUniform,
    RngStream,
    check_assumptions,
    closed_form_optimum_counterexample,
    counterexample_spec,
    f2_benchmark_spec,
    sample_market,
    sample_user,
)
from .exceptions import (
    ConfigError,
    DegenerateBuyer,
    FisherLabError,
    MaxIterationsError,
    NonpositivePrice,
    TypeMismatch,
    UnsupportedGood,
    ZeroUtility,
)
from .harness import ExperimentConfig, preset, run_experiment, run_simulation
from .market import BuyerProfile, MarketInstance, ValidationReport, validate_instance
from .metrics import (
    MetricsReport,
    SimulationTrace,
    constraint_violation,
    fit_loglog_slope,
    nsw_ratio,
    online_objective,
    regret,
)
from .policies import (
    adaptive_ce_policy,
    dynamic_saa_policy,
    revealed_preference_policy,
    static_equilibrium_policy,
)
from .solver import (
    CEInput,
    EquilibriumSolution,
    SolverParams,
    certify_equilibrium,
    solve_certainty_equivalent,
    solve_dual_subgradient,
    solve_eg_primal,
)

__all__ = [
    "BuyerProfile",
    "CEInput",
    "ConfigError",
    "DegenerateBuyer",
    "DiscreteDistribution",
    "DistributionSpec",
    "EquilibriumSolution",
    "ExperimentConfig",
    "FisherLabError",
    "IndependentUniform",
    "MarketInstance",
    "MaxIterationsError",
    "MetricsReport",
    "NonpositivePrice",
    "RngStream",
    "SimulationTrace",
    "SolverParams",
    "TieRule",
    "TypeMismatch",
    "UnsupportedGood",
    "ValidationReport",
    "ZeroUtility",
    "adaptive_ce_policy",
    "bang_per_buck_set",
    "certify_equilibrium",
    "check_assumptions",
    "closed_form_optimum_counterexample",
    "constraint_violation",
    "counterexample_spec",
    "dynamic_saa_policy",
    "f2_benchmark_spec",
    "fit_loglog_slope",
    "indirect_utility",
    "nsw_ratio",
    "online_objective",
    "optimal_bundle",
    "preset",
    "regret",
    "revealed_preference_policy",
    "run_experiment",
    "run_simulation",
    "sample_market",
    "sample_user",
    "solve_certainty_equivalent",
    "solve_dual_subgradient",
    "solve_eg_primal",
    "static_equilibrium_policy",
    "validate_instance",
]

VERSION = "1.0.0"

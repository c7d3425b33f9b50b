# © 2026 initOS GmbH
# License LGPL-3.0 or later (https://www.gnu.org/licenses/lgpl.html)

import asyncio
import csv
import json
import logging
import math
import os
from typing import Dict, List, Optional, Tuple

import numpy as np

from .buyer import TieRule, optimal_bundle
from .distributions import (
    DiscreteDistribution,
    DistributionSpec,
    RngStream,
    closed_form_optimum_counterexample,
    counterexample_spec,
    f2_benchmark_spec,
    sample_market,
)
from .exceptions import ConfigError
from .market import MarketInstance
from .metrics import (
    MetricsReport,
    SimulationTrace,
    constraint_violation,
    fit_loglog_slope,
    online_objective,
    price_step_ratios,
)
from .policies import (
    AdaptiveCEPolicy,
    ConsumptionModes,
    DynamicSAAPolicy,
    PricingPolicy,
    RevealedPreferencePolicy,
    StaticPricePolicy,
    static_equilibrium_policy,
)
from .solver import SolverParams, solve_eg_primal
from .utils import dumps, hexhash

_logger = logging.getLogger(__name__)

RowColumns = (
    "experiment",
    "policy",
    "n",
    "replication",
    "seed",
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

AggregateColumns = (
    "experiment",
    "policy",
    "n",
    "mean_regret",
    "std_regret",
    "mean_violation_l2",
    "std_violation_l2",
    "breach_rate",
    "zero_utility_count",
    "slope_regret",
    "slope_violation",
)

LipschitzColumns = ("experiment", "policy", "n", "replication", "t", "ratio")

# Parameters understood by every policy id
PolicyParams = {
    "static_eq": {"method", "sample_count", "prices"},
    "adaptive_ce": {"delta", "mode", "lipschitz"},
    "rp_additive": {"gamma_scale", "p1"},
    "rp_multiplicative": {"gamma_scale", "p1"},
    "dynamic_saa": {"delta", "p1", "gap_tol"},
}

StaticMethods = ("saa", "ce", "fixed")

StaticSampleStream = 0


def _positive(params: dict, key: str) -> None:
    if key not in params:
        return
    try:
        value = float(params[key])
    except (TypeError, ValueError):
        value = math.nan
    if not value > 0:
        raise ConfigError(f"{key} must be a positive number", key)


class PolicyBlock:
    def __init__(self, id: str, label: str = None, params: dict = None):
        if id not in PolicyParams:
            raise ConfigError(f"Unknown policy {id!r}", "policies")

        params = dict(params or {})
        unknown = set(params).difference(PolicyParams[id])
        if unknown:
            raise ConfigError(f"Unknown parameters for {id}: {sorted(unknown)}", "params")

        self.id = id
        self.label = label or id
        self.params = params
        self._check_values()

    def _check_values(self) -> None:
        p = self.params
        if self.id == "static_eq":
            if p.get("method", "saa") not in StaticMethods:
                raise ConfigError(f"method must be one of {StaticMethods}", "method")
            if p.get("method") == "fixed" and "prices" not in p:
                raise ConfigError("The fixed method needs prices", "prices")
            _positive(p, "sample_count")
        elif self.id == "adaptive_ce":
            if p.get("mode", "allocation_from_ce") not in ConsumptionModes:
                raise ConfigError(f"mode must be one of {ConsumptionModes}", "mode")
        elif self.id == "dynamic_saa":
            _positive(p, "gap_tol")
            delta = p.get("delta", 2.0)
            if not isinstance(delta, (int, float)) or not 1 < delta <= 2:
                raise ConfigError("delta must lie in (1, 2]", "delta")
        else:
            _positive(p, "gamma_scale")

    def needs_discrete(self) -> bool:
        """Policies solving the certainty equivalent program"""
        return self.id == "adaptive_ce" or (
            self.id == "static_eq" and self.params.get("method") == "ce"
        )

    def __repr__(self) -> str:
        return f"<PolicyBlock: {self.label}>"

    def to_json(self) -> dict:
        return {"id": self.id, "label": self.label, "params": self.params}

    @classmethod
    def from_json(cls, data) -> "PolicyBlock":
        if isinstance(data, str):
            return cls(data)
        unknown = set(data).difference({"id", "label", "params"})
        if unknown:
            raise ConfigError(f"Unknown policy keys: {sorted(unknown)}", "policies")
        if "id" not in data:
            raise ConfigError("Missing policy field id", "id")
        return cls(data["id"], data.get("label"), data.get("params"))


class ExperimentConfig:
    Keys = (
        "name",
        "distribution",
        "n_values",
        "replications",
        "policies",
        "seed",
        "oracle",
        "output",
    )

    def __init__(
        self,
        name: str,
        distribution: DistributionSpec,
        n_values: List[int],
        replications: int,
        policies: List[PolicyBlock],
        seed: int = 0,
        oracle: dict = None,
        output: str = ".",
    ):
        self.name = name
        self.distribution = distribution
        self.n_values = [int(n) for n in n_values]
        self.replications = int(replications)
        self.policies = list(policies)
        self.seed = int(seed)
        self.oracle = dict(oracle or {})
        self.output = output

        if not self.name:
            raise ConfigError("An experiment needs a name", "name")
        if self.replications < 1:
            raise ConfigError("replications must be at least 1", "replications")
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ConfigError("n_values must be positive", "n_values")
        if not self.policies:
            raise ConfigError("An experiment needs a policy", "policies")

        labels = [p.label for p in self.policies]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"Policy labels must be unique: {labels}", "label")

        for block in self.policies:
            self._check_policy(block)

        # Validate the oracle block early
        self.solver_params()

    def _check_policy(self, block: PolicyBlock) -> None:
        """Checks depending on the distribution, run before any solve"""
        if block.needs_discrete() and not isinstance(
            self.distribution, DiscreteDistribution
        ):
            raise ConfigError(
                f"{block.label} needs a discrete distribution", "distribution"
            )

        for key in ("p1", "prices"):
            if key in block.params:
                initial_price(block.params[key], self.distribution, key)

        delta = block.params.get("delta")
        if block.id == "adaptive_ce" and delta is not None:
            d = self.distribution.d
            try:
                delta = np.broadcast_to(np.asarray(delta, dtype=float), d.shape)
            except ValueError as e:
                raise ConfigError(f"delta must match {d.size} goods", "delta") from e
            if np.any(delta <= 0) or np.any(delta >= d):
                raise ConfigError("adaptive_ce needs 0 < delta < d", "delta")

    def __repr__(self) -> str:
        return f"<ExperimentConfig: {self.name}>"

    @property
    def force_iterative(self) -> bool:
        return bool(self.oracle.get("force_iterative", False))

    def solver_params(self, base: SolverParams = None) -> SolverParams:
        data = {k: v for k, v in self.oracle.items() if k != "force_iterative"}
        return SolverParams.from_json(data, base)

    def config_hash(self) -> str:
        return hexhash(dumps(self.to_json(), sort_keys=True))

    def copy(self, **changes) -> "ExperimentConfig":
        data = self.to_json()
        data.update(changes)
        return ExperimentConfig.from_json(data)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "distribution": self.distribution.to_json(),
            "n_values": self.n_values,
            "replications": self.replications,
            "policies": [p.to_json() for p in self.policies],
            "seed": self.seed,
            "oracle": self.oracle,
            "output": self.output,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("An experiment config must be a JSON object", "config")

        unknown = set(data).difference(cls.Keys)
        if unknown:
            raise ConfigError(f"Unknown config keys: {sorted(unknown)}", sorted(unknown)[0])
        for key in ("name", "distribution", "n_values", "policies"):
            if key not in data:
                raise ConfigError(f"Missing config field {key}", key)

        distribution = data["distribution"]
        if not isinstance(distribution, DistributionSpec):
            distribution = DistributionSpec.from_json(distribution)

        try:
            return cls(
                data["name"],
                distribution,
                data["n_values"],
                data.get("replications", 30),
                [PolicyBlock.from_json(p) for p in data["policies"]],
                seed=data.get("seed", 0),
                oracle=data.get("oracle"),
                output=data.get("output", "."),
            )
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"Invalid experiment config: {e}", "config") from e

    @classmethod
    def load(cls, filename) -> "ExperimentConfig":
        try:
            with open(filename, encoding="utf-8") as fp:
                data = json.load(fp)
        except OSError as e:
            raise ConfigError(f"Can't read {filename}: {e}", "config") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"Invalid JSON in {filename}: {e}", "config") from e
        return cls.from_json(data)


class ExperimentRow:
    def __init__(self, policy: str, n: int, replication: int, seed: int):
        self.policy = policy
        self.n = n
        self.replication = replication
        self.seed = seed
        self.metrics: Optional[MetricsReport] = None
        self.error = None
        self.lipschitz = None

    @property
    def breach(self) -> bool:
        return bool(self.metrics and self.metrics.breach)

    @property
    def ok(self) -> bool:
        return self.metrics is not None and not self.metrics.breach

    def __repr__(self) -> str:
        return f"<ExperimentRow: {self.policy} n={self.n} rep={self.replication}>"

    def to_json(self) -> dict:
        data = {
            "policy": self.policy,
            "n": self.n,
            "replication": self.replication,
            "seed": self.seed,
        }
        data.update(self.metrics.to_json() if self.metrics else {})
        data["breach"] = self.breach
        return data


class ExperimentReport:
    def __init__(self, config: ExperimentConfig, rows: List[ExperimentRow]):
        self.config = config
        self.rows = rows
        self.seed = config.seed
        self.config_hash = config.config_hash()
        self.failures = [r for r in rows if r.error]
        self.aggregates = aggregate(rows, config)
        self.slopes = {
            label: (values["slope_regret"], values["slope_violation"])
            for label, values in _slopes(self.aggregates).items()
        }

    def __repr__(self) -> str:
        return f"<ExperimentReport: {self.config.name} {len(self.rows)} rows>"

    def lipschitz_rows(self):
        for row in self.rows:
            for t, ratio in enumerate(row.lipschitz if row.lipschitz is not None else [], 1):
                yield {
                    "experiment": self.config.name,
                    "policy": row.policy,
                    "n": row.n,
                    "replication": row.replication,
                    "t": t,
                    "ratio": ratio,
                }


def initial_price(value, spec: DistributionSpec, field: str = "p1") -> np.ndarray:
    """Resolve a p1 parameter: `auto` (E[w] d / |d|^2, also the default),
    `ones` or a vector"""
    if value is None or value == "auto":
        return spec.expected_budget * spec.d / np.sum(spec.d * spec.d)
    if value == "ones":
        return np.ones(spec.m)

    try:
        prices = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        prices = None
    if prices is None or prices.shape != (spec.m,) or not np.all(prices > 0):
        raise ConfigError(f"{field} must be {spec.m} positive prices", field)
    return prices


def static_prices(
    block: PolicyBlock, spec: DistributionSpec, params: SolverParams, seed: int
) -> np.ndarray:
    """Price of a static block, shared by every cell of the experiment"""
    method = block.params.get("method", "saa")
    if method == "fixed":
        return initial_price(block.params.get("prices"), spec, "prices")

    rng = RngStream(seed, StaticSampleStream, namespace=0)
    sample_count = int(block.params.get("sample_count", 5000))
    policy = static_equilibrium_policy(spec, spec.d, sample_count, rng, params, method)
    return policy.static_prices


def build_policy(
    block: PolicyBlock,
    spec: DistributionSpec,
    n: int,
    params: SolverParams,
    static: Dict[str, np.ndarray],
) -> PricingPolicy:
    p = block.params
    if block.id == "static_eq":
        return StaticPricePolicy(static[block.label])

    if block.id == "adaptive_ce":
        if not isinstance(spec, DiscreteDistribution):
            raise ConfigError("adaptive_ce needs a discrete distribution", "distribution")
        return AdaptiveCEPolicy(
            spec.to_ce_input(),
            n,
            p.get("delta"),
            p.get("mode", "allocation_from_ce"),
            params,
        )

    if block.id in ("rp_additive", "rp_multiplicative"):
        return RevealedPreferencePolicy(
            spec.d,
            n,
            float(p.get("gamma_scale", 0.01)),
            block.id.split("_", 1)[1],
            initial_price(p.get("p1"), spec),
        )

    if block.id == "dynamic_saa":
        if "gap_tol" in p:
            params = params.copy(gap_tol=p["gap_tol"])
        return DynamicSAAPolicy(
            n * spec.d,
            n,
            float(p.get("delta", 2.0)),
            initial_price(p.get("p1"), spec),
            params,
        )

    raise ConfigError(f"Unknown policy {block.id!r}", "policies")


def oracle_value(
    spec: DistributionSpec,
    buyers,
    capacities,
    params: SolverParams = None,
    force_iterative: bool = False,
) -> float:
    """Offline optimum of the realized market"""
    n = len(buyers)
    capacities = np.asarray(capacities, dtype=float)
    if (
        not force_iterative
        and spec.is_counterexample()
        and np.all(capacities == float(n))
    ):
        s = sum(1 for b in buyers if b.kind == 0)
        return closed_form_optimum_counterexample(n, s)

    return solve_eg_primal(MarketInstance(capacities, buyers), params).primal_value


def run_simulation(
    spec: DistributionSpec,
    n: int,
    capacities,
    policy: PricingPolicy,
    seed: int,
    stream: int,
    params: SolverParams = None,
    force_iterative: bool = False,
    rule=TieRule.LOWEST_INDEX,
) -> Tuple[SimulationTrace, MetricsReport]:
    """Let n sampled buyers arrive one by one against the policy"""
    buyers = sample_market(spec, n, RngStream(seed, stream, namespace=n))
    trace = SimulationTrace(n, spec.m)

    for t, buyer in enumerate(buyers, 1):
        prices = policy.next_price(t)
        allocation = policy.allocation_for(t, buyer)
        if allocation is None:
            allocation = optimal_bundle(buyer, prices, rule)

        trace.record(t, prices, allocation, buyer)
        policy.observe(t, allocation, buyer)
        if policy.breached:
            break

    trace.final_prices = policy.prices.copy()
    trace.events.extend(policy.events)
    trace.tau = getattr(policy, "tau", None)

    seen = np.vstack([trace.prices[: trace.length], trace.final_prices])
    report = MetricsReport(
        max_price=float(seen.max()),
        min_price=float(seen.min()),
        tau=trace.tau,
        breach=policy.breached,
        n=n,
    )
    if policy.breached:
        return trace, report

    report.u_online = online_objective(trace)
    report.u_star = oracle_value(spec, buyers, capacities, params, force_iterative)
    report.violation_l2, report.violation_linf, _ = constraint_violation(
        trace, capacities
    )
    return trace, report


def run_cell(
    config: ExperimentConfig,
    block: PolicyBlock,
    n: int,
    replication: int,
    static: Dict[str, np.ndarray],
    params: SolverParams,
) -> ExperimentRow:
    row = ExperimentRow(block.label, n, replication, config.seed)
    spec = config.distribution
    try:
        policy = build_policy(block, spec, n, params, static)
        trace, row.metrics = run_simulation(
            spec,
            n,
            n * spec.d,
            policy,
            config.seed,
            replication,
            params,
            config.force_iterative,
        )
        if block.params.get("lipschitz"):
            row.lipschitz = price_step_ratios(trace, n).tolist()
    except Exception as e:
        _logger.exception("%s n=%d rep=%d failed", block.label, n, replication)
        row.error = f"{e.__class__.__name__}: {e}"
    return row


async def _worker(job_queue, rows, config, static, params):
    while True:
        block, n, replication = await job_queue.get()
        try:
            row = await asyncio.to_thread(
                run_cell, config, block, n, replication, static, params
            )
            rows.append(row)
        finally:
            job_queue.task_done()


async def _run_cells(config, cells, static, params, jobs):
    job_queue = asyncio.Queue()
    for cell in cells:
        job_queue.put_nowait(cell)

    rows = []
    workers = [
        asyncio.create_task(_worker(job_queue, rows, config, static, params))
        for _ in range(max(1, min(jobs, len(cells))))
    ]

    await job_queue.join()
    for worker in workers:
        worker.cancel()

    await asyncio.gather(*workers, return_exceptions=True)
    return rows


def run_experiment(
    config: ExperimentConfig, jobs: int = 1, settings_params: SolverParams = None
) -> ExperimentReport:
    """Run every (policy, n, replication) cell and aggregate per policy and n.

    Buyer streams depend on (seed, n, replication) only, so all policies see
    the same arrivals and the result does not depend on `jobs`.
    """
    params = config.solver_params(settings_params)
    spec = config.distribution

    static = {}
    for block in config.policies:
        if block.id == "static_eq":
            static[block.label] = static_prices(block, spec, params, config.seed)

    cells = [
        (block, n, rep)
        for block in config.policies
        for n in config.n_values
        for rep in range(config.replications)
    ]
    _logger.debug("Running %d cells of %s with %d jobs", len(cells), config.name, jobs)

    if jobs <= 1:
        rows = [run_cell(config, *cell, static, params) for cell in cells]
    else:
        rows = asyncio.run(_run_cells(config, cells, static, params, jobs))

    order = {block.label: i for i, block in enumerate(config.policies)}
    rows.sort(key=lambda r: (order[r.policy], r.n, r.replication))
    return ExperimentReport(config, rows)


def _mean_std(values) -> Tuple[Optional[float], Optional[float]]:
    if not values:
        return None, None
    arr = np.asarray(values, dtype=float)
    std = float(np.std(arr, ddof=1)) if len(arr) > 1 else None
    return float(np.mean(arr)), std


def aggregate(rows: List[ExperimentRow], config: ExperimentConfig) -> List[dict]:
    """Per (policy, n) statistics. Breached and failed rows only count towards
    the breach rate. Rows with a starved buyer are left out of the means and
    counted in zero_utility_count"""
    groups = {}
    for row in rows:
        groups.setdefault((row.policy, row.n), []).append(row)

    result = []
    for block in config.policies:
        for n in config.n_values:
            cell_rows = groups.get((block.label, n), [])
            if not cell_rows:
                continue

            good = [r.metrics for r in cell_rows if r.ok]
            # Starved buyers leave the online objective at -inf
            finite = [m for m in good if math.isfinite(m.u_online)]
            mean_regret, std_regret = _mean_std([m.regret for m in finite])
            mean_l2, std_l2 = _mean_std([m.violation_l2 for m in finite])
            breaches = sum(1 for r in cell_rows if r.breach)
            result.append(
                {
                    "experiment": config.name,
                    "policy": block.label,
                    "n": n,
                    "mean_regret": mean_regret,
                    "std_regret": std_regret,
                    "mean_violation_l2": mean_l2,
                    "std_violation_l2": std_l2,
                    "breach_rate": breaches / len(cell_rows),
                    "zero_utility_count": len(good) - len(finite),
                    "slope_regret": None,
                    "slope_violation": None,
                }
            )

    for label, values in _slopes(result).items():
        for entry in result:
            if entry["policy"] == label:
                entry.update(values)
    return result


def _fit(points) -> Optional[float]:
    points = [(n, v) for n, v in points if v is not None and math.isfinite(v)]
    if len(points) < 3 or any(v <= 0 for _, v in points):
        return None
    return fit_loglog_slope(points)[0]


def _slopes(aggregates) -> Dict[str, dict]:
    labels = []
    for entry in aggregates:
        if entry["policy"] not in labels:
            labels.append(entry["policy"])

    slopes = {}
    for label in labels:
        entries = [e for e in aggregates if e["policy"] == label]
        slopes[label] = {
            "slope_regret": _fit((e["n"], e["mean_regret"]) for e in entries),
            "slope_violation": _fit((e["n"], e["mean_violation_l2"]) for e in entries),
        }
    return slopes


def format_value(value) -> str:
    """CSV cell text. Floats keep their shortest round-trip repr"""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write(path, columns, records):
    with open(path, "w", newline="", encoding="utf-8") as fp:
        writer = csv.DictWriter(fp, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for record in records:
            writer.writerow({c: format_value(record.get(c)) for c in columns})
    _logger.info("Wrote %s", path)


def write_csv(report: ExperimentReport, directory: str, force: bool = False) -> List[str]:
    """Write `<name>_rows.csv`, `<name>_aggregate.csv` and, if recorded,
    `<name>_lipschitz.csv` into the directory"""
    name = report.config.name
    outputs = [
        (os.path.join(directory, f"{name}_rows.csv"), RowColumns, _row_records(report)),
        (
            os.path.join(directory, f"{name}_aggregate.csv"),
            AggregateColumns,
            report.aggregates,
        ),
    ]
    lipschitz = list(report.lipschitz_rows())
    if lipschitz:
        outputs.append(
            (os.path.join(directory, f"{name}_lipschitz.csv"), LipschitzColumns, lipschitz)
        )

    existing = [path for path, _, _ in outputs if os.path.exists(path)]
    if existing and not force:
        raise FileExistsError(f"Refusing to overwrite {', '.join(existing)}")

    os.makedirs(directory, exist_ok=True)
    for path, columns, records in outputs:
        _write(path, columns, records)
    return [path for path, _, _ in outputs]


def _row_records(report: ExperimentReport):
    for row in report.rows:
        record = row.to_json()
        record["experiment"] = report.config.name
        yield record


TheoryNValues = [100, 200, 500, 1000, 2000, 5000]
CounterexampleNValues = [100, 400, 1600, 6400, 20000]


def _presets() -> Dict[str, dict]:
    benchmark = f2_benchmark_spec().to_json()
    counterexample = counterexample_spec().to_json()
    rp = {"gamma_scale": 0.01, "p1": "ones"}
    return {
        "fig_theory_bounds": {
            "distribution": benchmark,
            "n_values": TheoryNValues,
            "replications": 30,
            "policies": [{"id": "rp_additive", "params": rp}],
        },
        "fig_comparison": {
            "distribution": benchmark,
            "n_values": TheoryNValues,
            "replications": 30,
            "policies": [
                {"id": "rp_additive", "params": rp},
                {"id": "static_eq", "params": {"method": "saa", "sample_count": 5000}},
                {"id": "dynamic_saa", "params": {"delta": 2.0, "p1": "ones"}},
            ],
        },
        "fig_static_vs_adaptive": {
            "distribution": counterexample,
            "n_values": CounterexampleNValues,
            "replications": 300,
            "policies": [
                {"id": "static_eq", "params": {"method": "ce"}},
                {"id": "adaptive_ce", "params": {"mode": "allocation_from_ce"}},
            ],
        },
        "fig_add_vs_mult": {
            "distribution": benchmark,
            "n_values": TheoryNValues,
            "replications": 30,
            "policies": [
                {
                    "id": "rp_additive",
                    "label": "additive_large_step",
                    "params": {"gamma_scale": 1.0, "p1": "ones"},
                },
                {
                    "id": "rp_multiplicative",
                    "label": "multiplicative_large_step",
                    "params": {"gamma_scale": 1.0, "p1": "ones"},
                },
                {"id": "rp_additive", "label": "additive_small_step", "params": rp},
                {
                    "id": "rp_multiplicative",
                    "label": "multiplicative_small_step",
                    "params": rp,
                },
            ],
        },
        "fig_price_positivity": {
            "distribution": counterexample,
            "n_values": TheoryNValues,
            "replications": 300,
            "policies": [{"id": "rp_additive", "params": rp}],
        },
        "fig_price_positivity_benchmark": {
            "distribution": benchmark,
            "n_values": TheoryNValues,
            "replications": 300,
            "policies": [{"id": "rp_additive", "params": rp}],
        },
        "fig_lipschitz": {
            "distribution": counterexample,
            "n_values": [10000],
            "replications": 1,
            "policies": [
                {
                    "id": "adaptive_ce",
                    "params": {"mode": "allocation_from_ce", "lipschitz": True},
                }
            ],
        },
    }


PresetNames = tuple(_presets())


def preset(
    name: str,
    n_values: List[int] = None,
    replications: int = None,
    seed: int = None,
    output: str = None,
) -> ExperimentConfig:
    """Configuration of a named experiment with optional overrides"""
    presets = _presets()
    if name not in presets:
        raise ConfigError(f"Unknown preset {name!r}, expected one of {PresetNames}", "preset")

    data = presets[name]
    data["name"] = name
    data["seed"] = 0 if seed is None else seed
    data["output"] = output or "."
    if n_values:
        data["n_values"] = list(n_values)
    if replications:
        data["replications"] = replications
    return ExperimentConfig.from_json(data)

#!/usr/bin/env python3
# © 2026 initOS GmbH
# License LGPL-3.0 or later (https://www.gnu.org/licenses/lgpl.html)

import argparse
import json
import logging
import sys

from .distributions import check_assumptions
from .exceptions import ConfigError, FisherLabError
from .harness import ExperimentConfig, PresetNames, preset, run_experiment, write_csv
from .market import load_instance, save_instance, validate_instance
from .solver import SolverParams, certify_equilibrium, solve_eg_primal
from .utils import Settings, default_jobs

_logger = logging.getLogger(__name__)

ExitOk, ExitConfig, ExitRuntime = 0, 1, 2


def parser_output(parser):
    parser.add_argument(
        "--out",
        default=None,
        help="Directory for the CSV files. Created if missing. "
        "Defaults to the output of the configuration",
    )
    parser.add_argument(
        "--force",
        action="store_true",
        default=False,
        help="Overwrite existing CSV files",
    )


def parser_run(parser):
    parser.add_argument("config", help="Experiment configuration as JSON file")
    parser_output(parser)


def parser_preset(parser):
    parser.add_argument("name", choices=PresetNames, help="Name of the experiment")
    parser.add_argument(
        "--n",
        default=None,
        type=int,
        nargs="+",
        help="Replace the horizons of the preset",
    )
    parser.add_argument(
        "--reps",
        default=None,
        type=int,
        help="Replace the number of replications of the preset",
    )
    parser.add_argument("--seed", default=None, type=int, help="Root seed")
    parser_output(parser)


def parser_solve(parser):
    parser.add_argument(
        "instance",
        help="Market instance as JSON file. To read from the stdin you can use `-`",
    )
    parser.add_argument(
        "--dump",
        default=None,
        help="Write the instance extended by allocations, prices and gap. "
        "To write to the stdout you can use `-`",
    )


def parser_validate(parser):
    parser.add_argument("config", help="Experiment configuration or instance file")


def parser_options(parser):
    parser.add_argument(
        "--verbose",
        default=False,
        action="store_true",
        help="Be verbose",
    )
    parser.add_argument(
        "-j",
        "--jobs",
        default=None,
        type=int,
        help="Number of replications to run in parallel. Defaults to "
        "FISHER_LAB_THREADS, the settings file or the number of CPUs",
    )
    parser.add_argument(
        "--settings",
        default="fisher_lab.cfg",
        help="INI file with solver defaults. Default is %(default)s",
    )


def parse_args(argv=None):
    parser = argparse.ArgumentParser(
        description="Equilibrium pricing experiments for online Fisher markets",
    )
    parser_options(parser.add_argument_group("Options"))

    sub = parser.add_subparsers(dest="command", required=True)
    parser_run(sub.add_parser("run", help="Run an experiment configuration"))
    parser_preset(sub.add_parser("preset", help="Run a predefined experiment"))
    parser_solve(sub.add_parser("solve", help="Solve the offline market of an instance"))
    parser_validate(sub.add_parser("validate", help="Check a configuration file"))
    return parser.parse_args(argv)


def run(config, args, settings):
    jobs = args.jobs if args.jobs else default_jobs(settings)
    report = run_experiment(config, jobs, SolverParams.from_settings(settings))
    paths = write_csv(report, args.out or config.output, force=args.force)
    for path in paths:
        print(path)

    for row in report.failures:
        _logger.error(
            "Failed: policy=%s n=%d replication=%d: %s",
            row.policy,
            row.n,
            row.replication,
            row.error,
        )

    if not any(row.ok for row in report.rows):
        _logger.error("No replication of %s finished without breach", config.name)
        return ExitRuntime
    return ExitOk


def solve(args, settings):
    instance = load_instance(args.instance)
    params = SolverParams.from_settings(settings)
    solution = solve_eg_primal(instance, params)

    print(f"prices: {json.dumps(solution.prices.tolist())}")
    print(f"primal_value: {solution.primal_value!r}")
    print(f"dual_value: {solution.dual_value!r}")
    print(f"gap: {solution.gap!r}")
    print(f"iterations: {solution.iterations}")
    if solution.unsupported:
        print(f"unsupported: {list(solution.unsupported)}")

    failed = certify_equilibrium(
        solution,
        instance.budgets,
        instance.utilities,
        instance.capacities,
        params,
    )
    print(f"certificate: {'ok' if not failed else ', '.join(failed)}")

    if args.dump:
        extra = {
            "allocations": solution.allocations.tolist(),
            "prices": solution.prices.tolist(),
            "gap": solution.gap,
        }
        save_instance(instance, args.dump, extra)
    return ExitOk


def validate(args):
    try:
        with open(args.config, encoding="utf-8") as fp:
            data = json.load(fp)
    except OSError as e:
        raise ConfigError(f"Can't read {args.config}: {e}", "config") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON in {args.config}: {e}", "config") from e

    if isinstance(data, dict) and "buyers" in data:
        report = validate_instance(load_instance(args.config))
    else:
        config = ExperimentConfig.from_json(data)
        report = check_assumptions(config.distribution)
        print(f"config_hash: {config.config_hash()}")

    print(json.dumps(report.to_json()))
    return ExitOk


def main(argv=None):
    args = parse_args(argv)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(message)s"))

    logger = logging.getLogger()
    logger.addHandler(handler)

    if args.verbose:
        logger.setLevel(logging.DEBUG)

    try:
        settings = Settings(args.settings)
        if args.command == "run":
            code = run(ExperimentConfig.load(args.config), args, settings)
        elif args.command == "preset":
            config = preset(args.name, args.n, args.reps, args.seed, args.out)
            code = run(config, args, settings)
        elif args.command == "solve":
            code = solve(args, settings)
        else:
            code = validate(args)
    except (ConfigError, FileExistsError) as e:
        field = getattr(e, "field", None)
        _logger.error("%s%s", f"[{field}] " if field else "", e)
        code = ExitConfig
    except FisherLabError as e:
        _logger.error("%s", e)
        code = ExitRuntime
    except OSError as e:
        _logger.error("Can't write output: %s", e)
        code = ExitConfig
    finally:
        logger.removeHandler(handler)

    return code


if __name__ == "__main__":
    sys.exit(main())

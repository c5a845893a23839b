#!/usr/bin/env python3
"""
QMC-DBDP CLI

Command-line interface: train a solution, evaluate it, probe quadrature
convergence rates and reproduce the MC/RQMC comparison tables.

Exit codes: 0 on success, 1 on a runtime failure, 2 on a usage or
configuration error.
"""

import argparse
import logging
import os
import sys
from typing import Any, Dict, Optional

from qmc_dbdp import __version__
from qmc_dbdp.core.config import (
    ExperimentConfig,
    dump_config,
    load_config,
    preset_config,
)
from qmc_dbdp.core.logger import setup_logging
from qmc_dbdp.dbdp.scheme import TerminalTarget
from qmc_dbdp.dbdp.solution import TrainedSolution
from qmc_dbdp.dbdp.trainer import build_step_networks, solve
from qmc_dbdp.evaluation.metrics import DEFAULT_M_EVAL, HISTOGRAM_BINS, HISTOGRAM_RANGE, relative_l2
from qmc_dbdp.evaluation.rates import (
    ConstantIntegrand,
    GenzProductPeak,
    Integrand,
    StepRiskIntegrand,
    compare_samplers,
)
from qmc_dbdp.evaluation.reporting import (
    config_provenance,
    provenance,
    write_error_report,
    write_histogram,
    write_rate_probe,
    write_suite_outputs,
)
from qmc_dbdp.evaluation.suite import run_suite
from qmc_dbdp.exceptions import ConfigurationError
from qmc_dbdp.problems.base_problem import McReferenceConfig
from qmc_dbdp.problems.factory import ProblemFactory
from qmc_dbdp.utils.seeding import STREAM_PROBE, STREAM_REFERENCE, derive_seed
from qmc_dbdp.utils.system_info import log_host_description

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

SOLUTION_DIR = "solution"
EFFECTIVE_CONFIG_NAME = "config.yaml"
# sub-tag of the probe stream seeding the frozen random networks
_PROBE_NETWORK_TAG = 2


def _add_common(parser: argparse.ArgumentParser, with_config: bool = True):
    if with_config:
        parser.add_argument("--config", type=str, help="Path to the YAML configuration file")
    parser.add_argument("--out", type=str, help="Output directory")
    parser.add_argument("--seed", type=int, help="Master seed (unsigned 64-bit)")
    parser.add_argument("--workers", type=int, help="Worker threads for independent runs")
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Set logging level (defaults to the config's logging.level)",
    )


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per operation."""
    parser = argparse.ArgumentParser(
        prog="qmc-dbdp",
        description="Deep backward dynamic programming with Monte Carlo and randomized quasi-Monte Carlo sampling",
    )
    parser.add_argument("--version", action="version", version=f"qmc-dbdp {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    solve_parser = commands.add_parser("solve", help="Train one solution and save its checkpoints")
    _add_common(solve_parser)

    evaluate_parser = commands.add_parser("evaluate", help="Relative L2 error of a saved solution")
    evaluate_parser.add_argument("solution_dir", type=str, help="Directory written by 'solve'")
    evaluate_parser.add_argument("--m-eval", type=int, default=DEFAULT_M_EVAL, help="Number of evaluation points")
    evaluate_parser.add_argument("--hjb-eval-points", type=int, default=256, help="Points with MC references (hjb)")
    evaluate_parser.add_argument(
        "--reference-samples", type=int, default=1 << 17, help="MC samples per reference point (hjb)"
    )
    _add_common(evaluate_parser, with_config=False)

    probe_parser = commands.add_parser("rate-probe", help="MC vs RQMC quadrature error rates")
    probe_parser.add_argument("--mode", choices=["network", "genz", "constant"], help="Integrand to probe")
    _add_common(probe_parser)

    table_parser = commands.add_parser("reproduce-table", help="Run the MC/RQMC comparison suite")
    table_parser.add_argument("table_id", choices=["heat", "hjb", "bs1", "bs2"], help="Problem of the table")
    table_parser.add_argument("--scale", choices=["desk", "full"], default="desk", help="Preset scale")
    _add_common(table_parser, with_config=False)
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    experiment: Dict[str, Any] = {}
    if args.seed is not None:
        experiment["master_seed"] = args.seed
    if args.out is not None:
        experiment["output_dir"] = args.out
    if args.workers is not None:
        experiment["workers"] = args.workers
    return {"experiment": experiment} if experiment else {}


def _configure_logging(args: argparse.Namespace, config: Optional[ExperimentConfig] = None):
    if config is None:
        setup_logging(args.log_level or "INFO")
        return
    section = config.logging
    setup_logging(args.log_level or section.level, section.file, section.max_size_mb, section.max_files)


def _loss(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.6e}"


def cmd_solve(args: argparse.Namespace) -> int:
    """Train one solution, save checkpoints, manifest and effective config, print per-step losses."""
    config = load_config(args.config, _overrides(args))
    _configure_logging(args, config)
    log_host_description()

    problem = ProblemFactory().create_problem(config.problem_spec())
    grid = config.time_grid()
    logger.info("Solving %r on %d steps with %s sampling", problem, grid.N, config.sampler.kind)
    solution = solve(
        problem,
        grid,
        config.schedule(),
        config.sampler.kind,
        config.experiment.master_seed,
        options=config.network_options(),
        scramble=config.sampler.scramble,
        warm_start=config.training.warm_start,
        log_every=config.training.log_every,
        progress=config.training.progress,
    )

    out_dir = os.path.join(config.experiment.output_dir, SOLUTION_DIR)
    solution.save(out_dir)
    with open(os.path.join(out_dir, EFFECTIVE_CONFIG_NAME), "w", encoding="utf-8", newline="\n") as f:
        f.write(dump_config(config))

    for step in solution.metadata["steps"]:
        print(f"step {step['step']}: loss {_loss(step['initial_loss'])} -> {_loss(step['final_loss'])}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    """Write the error report and histogram of a saved solution."""
    _configure_logging(args)
    log_host_description()
    if args.m_eval < 1:
        raise ConfigurationError(f"--m-eval must be positive, got {args.m_eval}")
    solution = TrainedSolution.load(args.solution_dir)
    seed = args.seed if args.seed is not None else int(solution.metadata.get("master_seed", 0))

    report = relative_l2(
        solution,
        solution.problem,
        m_eval=args.m_eval,
        seed=seed,
        hjb_eval_points=args.hjb_eval_points,
        mc_config=McReferenceConfig(samples=args.reference_samples, seed=derive_seed(seed, STREAM_REFERENCE)),
    )
    settings = {
        "solution": solution.manifest(),
        "evaluation": {
            "m_eval": args.m_eval,
            "seed": seed,
            "hjb_eval_points": args.hjb_eval_points,
            "reference_samples": args.reference_samples,
            "histogram_range": list(HISTOGRAM_RANGE),
            "histogram_bins": HISTOGRAM_BINS,
        },
    }
    header = provenance(settings)
    out_dir = args.out or args.solution_dir
    write_error_report(os.path.join(out_dir, "error_report.csv"), report, header)
    write_histogram(os.path.join(out_dir, "histogram.csv"), report.histogram, header)
    print(f"relative_l2 {report.relative_l2:.6e} (stderr {report.stderr:.2e}), out_of_range {report.out_of_range_count}")
    return EXIT_OK


def probe_integrand(config: ExperimentConfig) -> Integrand:
    """Integrand selected by ``rate_probe.mode``."""
    probe = config.rate_probe
    if probe.mode == "genz":
        return GenzProductPeak(probe.genz_dimension)
    if probe.mode == "constant":
        return ConstantIntegrand(probe.genz_dimension)

    problem = ProblemFactory().create_problem(config.problem_spec(probe.d))
    grid = config.time_grid()
    i = grid.N - 1
    master = config.experiment.master_seed
    nets = build_step_networks(
        problem.d,
        config.network_options(probe.d),
        derive_seed(master, STREAM_PROBE, _PROBE_NETWORK_TAG, 0),
        derive_seed(master, STREAM_PROBE, _PROBE_NETWORK_TAG, 1),
    )
    return StepRiskIntegrand(problem, nets, TerminalTarget(problem), grid.t(i), grid.dt(i))


def cmd_rate_probe(args: argparse.Namespace) -> int:
    """Write MC and RQMC RMSE per batch size and print the fitted slopes."""
    overrides = _overrides(args)
    if args.mode is not None:
        overrides["rate_probe"] = {"mode": args.mode}
    config = load_config(args.config, overrides)
    _configure_logging(args, config)
    log_host_description()

    probe = config.rate_probe
    integrand = probe_integrand(config)
    logger.info("Rate probe on %s (%d dimensions), %d replications", probe.mode, integrand.dimension, probe.replications)
    results = compare_samplers(
        integrand,
        probe.m_list,
        probe.replications,
        seed=config.experiment.master_seed,
        oracle_m=probe.oracle_m,
        scramble=config.sampler.scramble,
    )

    path = os.path.join(config.experiment.output_dir, f"rate_probe_{probe.mode}.csv")
    write_rate_probe(path, results, config_provenance(config))
    for kind, result in sorted(results.items()):
        if result.degenerate:
            print(f"{kind}: degenerate, RMSE vanishes at every m (integrand integrated exactly)")
        else:
            print(f"{kind}: fitted slope {result.fitted_slope:.3f}")
    return EXIT_OK


def cmd_reproduce_table(args: argparse.Namespace) -> int:
    """Run a preset suite and write its table and histograms."""
    setup_logging(args.log_level or "INFO")
    config = preset_config(args.table_id, args.scale, master_seed=args.seed or 0)
    overrides = _overrides(args)
    if overrides:
        data = config.model_dump(mode="json")
        data["experiment"].update(overrides["experiment"])
        config = ExperimentConfig.model_validate(data)
    log_host_description()

    suite = run_suite(config)
    written = write_suite_outputs(config.experiment.output_dir, suite, config)
    with open(written["table"], "r", encoding="utf-8") as f:
        sys.stdout.write("".join(line for line in f if not line.startswith("#")))

    incomplete = [cell for cell in suite.cells if not cell.complete]
    if incomplete:
        logger.error("%d of %d cells are incomplete", len(incomplete), len(suite.cells))
        return EXIT_FAILURE
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "evaluate": cmd_evaluate,
    "rate-probe": cmd_rate_probe,
    "reproduce-table": cmd_reproduce_table,
}


def main(argv=None) -> int:
    """Main entry point for the application."""
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigurationError as e:
        if not logging.getLogger().handlers:
            setup_logging("INFO")
        logger.critical("Configuration error: %s", str(e))
        return EXIT_USAGE
    except KeyboardInterrupt:
        logger.warning("Interrupted")
        return EXIT_FAILURE
    except Exception as e:
        if not logging.getLogger().handlers:
            setup_logging("INFO")
        logger.critical("Unhandled exception: %s", str(e), exc_info=True)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())

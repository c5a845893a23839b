"""
Experiment Suite

Trains and evaluates independent runs for every (dimension, batch size,
sampler) cell of a configuration and aggregates the relative L2 errors into
mean and standard deviation per cell.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from qmc_dbdp.core.config import ExperimentConfig, cell_config
from qmc_dbdp.core.runner import ExperimentRunner
from qmc_dbdp.dbdp.trainer import solve
from qmc_dbdp.evaluation.metrics import ErrorReport, evaluation_points, reference_values, relative_l2
from qmc_dbdp.problems.base_problem import ReferenceEstimate
from qmc_dbdp.problems.factory import ProblemFactory
from qmc_dbdp.utils.seeding import STREAM_EVAL, STREAM_REFERENCE, STREAM_RUN, derive_seed

logger = logging.getLogger(__name__)

# (d, m, sampler)
CellKey = Tuple[int, int, str]
# (d, m, sampler, run)
RunKey = Tuple[int, int, str, int]


@dataclass
class RunResult:
    """One trained and evaluated run."""

    run: int
    seed: int
    relative_l2: float
    stderr: float
    final_losses: List[float]
    pointwise_errors: np.ndarray


@dataclass
class CellResult:
    """
    Runs of one (d, m, sampler) cell.

    A cell with failed runs is incomplete; its statistics cover the completed runs.
    """

    problem: str
    d: int
    N: int
    m: int
    sampler: str
    requested_runs: int
    runs: List[RunResult] = field(default_factory=list)
    failures: Dict[int, str] = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return not self.failures and len(self.runs) == self.requested_runs

    @property
    def values(self) -> List[float]:
        return [r.relative_l2 for r in self.runs]

    @property
    def mean(self) -> float:
        return aggregate_errors(self.values)[0]

    @property
    def std(self) -> float:
        return aggregate_errors(self.values)[1]

    def best(self) -> Optional[RunResult]:
        return min(self.runs, key=lambda r: (r.relative_l2, r.run)) if self.runs else None

    def worst(self) -> Optional[RunResult]:
        return max(self.runs, key=lambda r: (r.relative_l2, -r.run)) if self.runs else None


@dataclass
class SuiteResult:
    """All cells of a suite, sorted by (d, m, sampler)."""

    problem: str
    cells: List[CellResult]

    def cell(self, d: int, m: int, sampler: str) -> CellResult:
        for c in self.cells:
            if (c.d, c.m, c.sampler) == (d, m, sampler):
                return c
        raise KeyError((d, m, sampler))

    def variance_reduction(self) -> List[Tuple[int, int, float]]:
        """
        MC variance over RQMC variance of the relative L2 error, per (d, m).

        Pairs where either sampler has fewer than 2 completed runs are skipped;
        a zero RQMC variance gives ``inf``.
        """
        factors = []
        for d, m in sorted({(c.d, c.m) for c in self.cells}):
            try:
                mc, rqmc = self.cell(d, m, "mc"), self.cell(d, m, "rqmc")
            except KeyError:
                continue
            if len(mc.runs) < 2 or len(rqmc.runs) < 2:
                continue
            var_mc, var_rqmc = mc.std ** 2, rqmc.std ** 2
            factors.append((d, m, var_mc / var_rqmc if var_rqmc > 0 else math.inf))
        return factors


def aggregate_errors(values: Sequence[float]) -> Tuple[float, float]:
    """
    Mean and sample standard deviation (n - 1 denominator, 0 for a single value).

    Returns:
        Tuple[float, float]: ``(nan, nan)`` for no values
    """
    if not values:
        return math.nan, math.nan
    arr = np.asarray(values, dtype=np.float64)
    std = float(np.std(arr, ddof=1)) if arr.shape[0] > 1 else 0.0
    return float(np.mean(arr)), std


def run_seed(master_seed: int, d: int, m: int, run: int) -> int:
    """Master seed of one run; MC and RQMC runs of the same index share it."""
    return derive_seed(master_seed, STREAM_RUN, d, m, run)


def evaluation_seed(config: ExperimentConfig, d: int) -> int:
    """Evaluation seed shared by every run at dimension ``d``."""
    return derive_seed(config.evaluation_seed(), STREAM_EVAL, d)


def _train_and_evaluate(
    config: ExperimentConfig, key: RunKey, reference: Optional[ReferenceEstimate]
) -> RunResult:
    d, m, sampler, run = key
    cfg = cell_config(config, d, m, sampler)
    problem = ProblemFactory().create_problem(cfg.problem_spec())
    seed = run_seed(config.experiment.master_seed, d, m, run)

    solution = solve(
        problem,
        cfg.time_grid(),
        cfg.schedule(),
        sampler,
        seed,
        options=cfg.network_options(),
        scramble=cfg.sampler.scramble,
        warm_start=cfg.training.warm_start,
        log_every=cfg.training.log_every,
        progress=False,
    )
    ev = cfg.evaluation
    report: ErrorReport = relative_l2(
        solution,
        problem,
        m_eval=ev.m_eval,
        seed=evaluation_seed(config, d),
        hjb_eval_points=ev.hjb_eval_points,
        value_range=tuple(ev.histogram_range),
        bins=ev.histogram_bins,
        reference=reference,
    )
    return RunResult(
        run=run,
        seed=seed,
        relative_l2=report.relative_l2,
        stderr=report.stderr,
        final_losses=[step["final_loss"] for step in solution.metadata["steps"]],
        pointwise_errors=report.pointwise_errors,
    )


def _references(config: ExperimentConfig) -> Dict[int, ReferenceEstimate]:
    """Monte Carlo references per dimension, computed once and shared by all runs."""
    references = {}
    for d in config.dims():
        problem = ProblemFactory().create_problem(config.problem_spec(d))
        if problem.has_closed_form:
            continue
        seed = evaluation_seed(config, d)
        points = evaluation_points(problem, config.evaluation.m_eval, seed, config.evaluation.hjb_eval_points)
        references[d] = reference_values(
            problem, points, seed, config.reference_config(derive_seed(seed, STREAM_REFERENCE))
        )
    return references


RunFunction = Callable[[ExperimentConfig, RunKey, Optional[ReferenceEstimate]], RunResult]


def run_suite(
    config: ExperimentConfig, workers: Optional[int] = None, run_function: Optional[RunFunction] = None
) -> SuiteResult:
    """
    Train and evaluate ``experiment.n_runs`` runs per cell.

    Args:
        config (ExperimentConfig): Suite configuration
        workers (Optional[int]): Pool size, defaults to ``experiment.workers``
            and then to the number of physical cores
        run_function (Optional[RunFunction]): Replaces training and evaluation of one run

    Returns:
        SuiteResult: Per-cell runs; failed runs are recorded, not raised
    """
    run_function = run_function or _train_and_evaluate
    kind = config.problem.kind.value
    if config.experiment.scale == "full":
        logger.warning("Full-scale suite for %s: expect a long-running job", kind)

    references = _references(config) if run_function is _train_and_evaluate else {}
    tasks = {}
    for d in config.dims():
        for m in config.batch_sizes():
            for sampler in config.experiment.samplers:
                for run in range(config.experiment.n_runs):
                    key = (d, m, sampler, run)
                    tasks[key] = lambda key=key: run_function(config, key, references.get(key[0]))

    runner = ExperimentRunner(workers or config.experiment.workers)
    outcomes = runner.run(tasks)

    cells: Dict[CellKey, CellResult] = {}
    for key in sorted(outcomes):
        d, m, sampler, run = key
        cell = cells.setdefault(
            (d, m, sampler),
            CellResult(kind, d, config.problem.N, m, sampler, config.experiment.n_runs),
        )
        outcome = outcomes[key]
        if outcome.ok:
            cell.runs.append(outcome.result)
        else:
            cell.failures[run] = outcome.error or "unknown error"

    for cell in cells.values():
        if cell.complete:
            logger.info(
                "%s d=%d m=%d %s: relative L2 %.4e +- %.4e over %d runs",
                kind, cell.d, cell.m, cell.sampler, cell.mean, cell.std, len(cell.runs),
            )
        else:
            logger.warning(
                "%s d=%d m=%d %s incomplete: %d of %d runs failed",
                kind, cell.d, cell.m, cell.sampler, len(cell.failures), cell.requested_runs,
            )
    return SuiteResult(problem=kind, cells=[cells[k] for k in sorted(cells)])

"""
Error Metrics

Relative L2 error of a trained solution at t = 0 and density histograms of
the pointwise errors.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np

from qmc_dbdp.dbdp.solution import TrainedSolution
from qmc_dbdp.exceptions import ContractViolation
from qmc_dbdp.lowdisc.samplers import mc_points, uniform_box
from qmc_dbdp.problems.base_problem import BaseProblem, McReferenceConfig, ReferenceEstimate
from qmc_dbdp.utils.seeding import STREAM_EVAL, STREAM_REFERENCE, derive_seed

logger = logging.getLogger(__name__)

DEFAULT_M_EVAL = 1 << 16
HISTOGRAM_RANGE = (-0.1, 0.1)
HISTOGRAM_BINS = 50

Approximation = Callable[[np.ndarray], np.ndarray]


@dataclass
class Histogram:
    """
    Density histogram over a fixed range.

    ``densities`` are normalized by the total number of errors, so they
    integrate to the in-range fraction and
    ``sum(densities * widths) + out_of_range_count / total == 1``.
    """

    edges: np.ndarray
    densities: np.ndarray
    out_of_range_count: int
    total: int

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def in_range_mass(self) -> float:
        return float(np.sum(self.densities * self.widths))


@dataclass
class ErrorReport:
    """
    Relative L2 error of U_0 against u(0, .) on uniform points of [a, b]^d.

    ``stderr`` is the delta-method standard error of the ratio estimator and
    ``reference_stderr`` the mean standard error of Monte Carlo references
    (zero for closed-form problems).
    """

    relative_l2: float
    pointwise_errors: np.ndarray
    histogram: Histogram
    stderr: float
    reference_stderr: float
    m_eval: int

    @property
    def out_of_range_count(self) -> int:
        return self.histogram.out_of_range_count


def pointwise_histogram(
    errors: np.ndarray, value_range: Tuple[float, float] = HISTOGRAM_RANGE, bins: int = HISTOGRAM_BINS
) -> Histogram:
    """
    Density histogram of pointwise errors with a separate out-of-range tally.

    Args:
        errors (np.ndarray): Pointwise errors
        value_range (Tuple[float, float]): Closed histogram range
        bins (int): Number of equal-width bins
    """
    errors = np.asarray(errors, dtype=np.float64).reshape(-1)
    lo, hi = value_range
    in_range = (errors >= lo) & (errors <= hi)
    counts, edges = np.histogram(errors[in_range], bins=bins, range=(lo, hi))
    total = errors.shape[0]
    densities = counts / (total * np.diff(edges)) if total else np.zeros(bins)
    return Histogram(edges=edges, densities=densities, out_of_range_count=int(total - in_range.sum()), total=total)


def ratio_stderr(errors: np.ndarray, reference: np.ndarray) -> float:
    """Delta-method standard error of sqrt(sum e^2 / sum u^2)."""
    a = errors * errors
    b = reference * reference
    n = a.shape[0]
    A, B = a.mean(), b.mean()
    if n < 2 or A == 0.0 or B == 0.0:
        return 0.0
    cov = np.cov(np.vstack([a, b]), ddof=1)
    var_ratio_sq = (cov[0, 0] / B ** 2 - 2.0 * A * cov[0, 1] / B ** 3 + A ** 2 * cov[1, 1] / B ** 4) / n
    ratio = math.sqrt(A / B)
    return float(math.sqrt(max(var_ratio_sq, 0.0)) / (2.0 * ratio))


def evaluation_points(problem: BaseProblem, m_eval: int, seed: int, hjb_eval_points: int = 256) -> np.ndarray:
    """
    i.i.d. uniform points on [a, b]^d from the evaluation stream of ``seed``.

    Problems without a closed form keep only the first ``hjb_eval_points``.
    """
    batch = mc_points(derive_seed(seed, STREAM_EVAL), m_eval, problem.d)
    points = uniform_box(batch, problem.a, problem.b)
    if not problem.has_closed_form:
        points = points[: min(hjb_eval_points, m_eval)]
    return points


def reference_values(
    problem: BaseProblem, points: np.ndarray, seed: int, mc_config: Optional[McReferenceConfig] = None
) -> ReferenceEstimate:
    """u(0, .) on the evaluation points; MC references default to a stream derived from ``seed``."""
    if not problem.has_closed_form:
        if mc_config is None:
            mc_config = McReferenceConfig(seed=derive_seed(seed, STREAM_REFERENCE))
        logger.info("Estimating %d Monte Carlo references with %d samples each", points.shape[0], mc_config.samples)
    return problem.reference_solution(points, t=0.0, mc_config=mc_config)


def relative_l2(
    solution: Union[TrainedSolution, Approximation],
    problem: BaseProblem,
    m_eval: int = DEFAULT_M_EVAL,
    seed: int = 0,
    hjb_eval_points: int = 256,
    mc_config: Optional[McReferenceConfig] = None,
    value_range: Tuple[float, float] = HISTOGRAM_RANGE,
    bins: int = HISTOGRAM_BINS,
    reference: Optional[ReferenceEstimate] = None,
) -> ErrorReport:
    """
    Relative L2 error sqrt(sum (U(eta) - u(0, eta))^2 / sum u(0, eta)^2).

    Args:
        solution (Union[TrainedSolution, Approximation]): Trained solution, or
            any batch function standing in for U_0
        problem (BaseProblem): Problem the solution approximates
        m_eval (int): Number of uniform evaluation points
        seed (int): Seed of the evaluation points (and of MC references)
        hjb_eval_points (int): Points carrying MC references when there is no closed form
        mc_config (Optional[McReferenceConfig]): Reference settings; the seed
            defaults to one derived from ``seed``
        value_range (Tuple[float, float]): Histogram range
        bins (int): Histogram bins
        reference (Optional[ReferenceEstimate]): Precomputed references on the
            evaluation points, as returned by ``reference_values``

    Returns:
        ErrorReport: Ratio, pointwise errors and histogram
    """
    approximate = solution.u0 if isinstance(solution, TrainedSolution) else solution
    points = evaluation_points(problem, m_eval, seed, hjb_eval_points)
    if reference is None:
        reference = reference_values(problem, points, seed, mc_config)
    elif reference.values.shape[0] != points.shape[0]:
        raise ContractViolation(
            f"Got {reference.values.shape[0]} reference values for {points.shape[0]} evaluation points"
        )

    predicted = np.asarray(approximate(points), dtype=np.float64).reshape(-1)
    errors = predicted - reference.values

    denominator = float(np.sum(reference.values ** 2))
    value = math.sqrt(float(np.sum(errors ** 2)) / denominator) if denominator > 0 else math.inf
    report = ErrorReport(
        relative_l2=value,
        pointwise_errors=errors,
        histogram=pointwise_histogram(errors, value_range, bins),
        stderr=ratio_stderr(errors, reference.values),
        reference_stderr=float(np.mean(reference.stderr)),
        m_eval=points.shape[0],
    )
    logger.info(
        "Relative L2 error %.4e (stderr %.2e) on %d points, %d outside [%g, %g]",
        report.relative_l2, report.stderr, report.m_eval, report.out_of_range_count, value_range[0], value_range[1],
    )
    return report

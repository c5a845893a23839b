"""
Tests for the relative L2 error and pointwise error histograms.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmc_dbdp.evaluation.metrics import (
    evaluation_points,
    pointwise_histogram,
    ratio_stderr,
    reference_values,
    relative_l2,
)
from qmc_dbdp.exceptions import ContractViolation
from qmc_dbdp.problems.base_problem import McReferenceConfig
from qmc_dbdp.problems.factory import create_problem


def _exact(problem):
    return lambda x: problem.exact_solution(0.0, x)


def test_exact_solution_has_zero_error(heat2):
    report = relative_l2(_exact(heat2), heat2, m_eval=4096, seed=3)
    assert report.relative_l2 == 0.0
    assert report.stderr == 0.0
    assert report.reference_stderr == 0.0
    assert report.m_eval == 4096
    assert report.out_of_range_count == 0


def test_doubled_solution_has_unit_error(heat2):
    report = relative_l2(lambda x: 2.0 * heat2.exact_solution(0.0, x), heat2, m_eval=4096, seed=3)
    assert report.relative_l2 == pytest.approx(1.0, abs=1e-12)


def test_constant_offset_error_is_estimated_consistently(heat2):
    approx = lambda x: heat2.exact_solution(0.0, x) + 0.03 * np.sin(np.sum(x, axis=1))  # noqa: E731
    small = relative_l2(approx, heat2, m_eval=1 << 12, seed=1)
    large = relative_l2(approx, heat2, m_eval=1 << 13, seed=2)
    assert small.stderr > 0
    assert abs(small.relative_l2 - large.relative_l2) <= 4.0 * math.hypot(small.stderr, large.stderr)


def test_evaluation_points_are_deterministic_and_in_the_box():
    problem = create_problem("bs2", 3, a=0.2, b=0.7)
    points = evaluation_points(problem, 500, seed=9)
    np.testing.assert_array_equal(points, evaluation_points(problem, 500, seed=9))
    assert points.shape == (500, 3)
    assert points.min() >= 0.2 and points.max() <= 0.7
    assert not np.array_equal(points, evaluation_points(problem, 500, seed=10))


def test_hjb_uses_a_reference_subset():
    problem = create_problem("hjb", 2)
    points = evaluation_points(problem, 1024, seed=4, hjb_eval_points=16)
    assert points.shape == (16, 2)
    config = McReferenceConfig(samples=2000, seed=5)
    reference = reference_values(problem, points, seed=4, mc_config=config)
    report = relative_l2(
        lambda x: reference.values, problem, m_eval=1024, seed=4, hjb_eval_points=16, reference=reference
    )
    assert report.relative_l2 == 0.0
    assert report.m_eval == 16
    assert report.reference_stderr > 0


def test_reference_shape_is_checked(heat2):
    points = evaluation_points(heat2, 10, seed=1)
    reference = reference_values(heat2, points, seed=1)
    with pytest.raises(ContractViolation):
        relative_l2(_exact(heat2), heat2, m_eval=20, seed=1, reference=reference)


def test_histogram_of_zero_errors():
    histogram = pointwise_histogram(np.zeros(100))
    assert histogram.out_of_range_count == 0
    assert histogram.edges[0] == -0.1 and histogram.edges[-1] == 0.1
    assert histogram.densities.shape == (50,)
    assert np.count_nonzero(histogram.densities) == 1
    assert histogram.in_range_mass() == pytest.approx(1.0, abs=1e-12)


def test_histogram_counts_out_of_range_errors():
    histogram = pointwise_histogram(np.array([-0.2, 0.2]))
    assert histogram.out_of_range_count == 2
    np.testing.assert_array_equal(histogram.densities, 0.0)


def test_histogram_closed_range_keeps_the_endpoints():
    histogram = pointwise_histogram(np.array([-0.1, 0.1]))
    assert histogram.out_of_range_count == 0


def test_uniform_errors_give_flat_density(rng):
    histogram = pointwise_histogram(rng.uniform(-0.1, 0.1, 200000))
    np.testing.assert_allclose(histogram.densities, 5.0, atol=0.5)


@settings(max_examples=100, deadline=None)
@given(
    errors=st.lists(st.floats(-1.0, 1.0, allow_nan=False), min_size=1, max_size=200),
    bins=st.integers(1, 60),
)
def test_histogram_conserves_mass(errors, bins):
    histogram = pointwise_histogram(np.array(errors), (-0.1, 0.1), bins)
    total = histogram.in_range_mass() + histogram.out_of_range_count / histogram.total
    assert total == pytest.approx(1.0, abs=1e-12)


def test_ratio_stderr_vanishes_without_error():
    assert ratio_stderr(np.zeros(10), np.ones(10)) == 0.0
    assert ratio_stderr(np.ones(1), np.ones(1)) == 0.0

"""
Tests for the Sobol' generator and direction-number table.
"""

import numpy as np
import pytest

from qmc_dbdp.exceptions import ConfigurationError, ContractViolation
from qmc_dbdp.lowdisc.scramble import ScrambleKey, ScrambleMode
from qmc_dbdp.lowdisc.sobol import BITS, SobolGenerator, direction_numbers, max_dimension, sobol_points


def _is_permutation(values: np.ndarray, n: int) -> bool:
    return np.array_equal(np.sort(values), np.arange(n))


def test_first_coordinate_is_van_der_corput():
    points = SobolGenerator(1).integer_points(0, 8)[:, 0].astype(np.float64) * 2.0 ** -BITS
    np.testing.assert_array_equal(points, [0.0, 0.5, 0.25, 0.75, 0.125, 0.625, 0.375, 0.875])


def test_second_coordinate_leading_points():
    points = SobolGenerator(2).integer_points(0, 4)[:, 1].astype(np.float64) * 2.0 ** -BITS
    np.testing.assert_array_equal(points, [0.0, 0.5, 0.75, 0.25])


@pytest.mark.parametrize("k", range(1, 11))
def test_one_dimensional_projections_are_equidistributed(k):
    gen = SobolGenerator(12)
    digits = gen.integer_points(0, 1 << k) >> np.uint64(BITS - k)
    for j in range(12):
        assert _is_permutation(digits[:, j], 1 << k), f"coordinate {j} at 2^{k} points"


@pytest.mark.parametrize("k", [2, 5, 8, 10])
def test_first_two_coordinates_form_a_zero_net(k):
    points = SobolGenerator(2).integer_points(0, 1 << k)
    for a in range(k + 1):
        rows = points[:, 0] >> np.uint64(BITS - a) if a else np.zeros(1 << k, dtype=np.uint64)
        cols = points[:, 1] >> np.uint64(BITS - (k - a)) if k - a else np.zeros(1 << k, dtype=np.uint64)
        boxes = rows * np.uint64(1 << (k - a)) + cols
        assert _is_permutation(boxes, 1 << k), f"elementary boxes 2^-{a} x 2^-{k - a}"


def test_owen_scrambled_points_keep_equidistribution():
    gen = SobolGenerator(12)
    batch = sobol_points(gen, ScrambleKey(2024, ScrambleMode.OWEN_NESTED), 1 << 10)
    digits = np.floor(batch.values * (1 << 10)).astype(np.int64)
    for j in range(12):
        assert _is_permutation(digits[:, j], 1 << 10)


def test_sobol_points_advance_and_reset():
    gen = SobolGenerator(3)
    key = ScrambleKey(1, ScrambleMode.NONE)
    first = sobol_points(gen, key, 4)
    assert gen.next_index == 4
    second = sobol_points(gen, key, 4)
    assert not np.array_equal(first.values, second.values)
    gen.reset()
    np.testing.assert_array_equal(sobol_points(gen, key, 4).values, first.values)


def test_points_are_clamped_inside_the_unit_cube():
    batch = sobol_points(SobolGenerator(2), ScrambleKey(0, ScrambleMode.NONE), 2)
    assert batch.values.min() > 0.0
    assert batch.values.max() < 1.0


def test_table_limits():
    assert max_dimension() == 300
    direction_numbers(300)
    with pytest.raises(ConfigurationError):
        direction_numbers(301)
    with pytest.raises(ContractViolation):
        sobol_points(SobolGenerator(2), ScrambleKey(0), 0)


def test_direction_numbers_are_read_only():
    v = direction_numbers(5)
    with pytest.raises(ValueError):
        v[0, 0] = 0

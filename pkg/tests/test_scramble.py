"""
Tests for digital shift and Owen scrambling.
"""

import numpy as np
import pytest
from scipy import stats

from qmc_dbdp.lowdisc.scramble import ScrambleKey, ScrambleMode, digital_shift, dimension_keys, scramble_points
from qmc_dbdp.lowdisc.sobol import SobolGenerator


@pytest.fixture(scope="module")
def raw_points():
    return SobolGenerator(4).integer_points(0, 16)


def test_key_validation():
    with pytest.raises(ValueError):
        ScrambleKey(-1)
    with pytest.raises(ValueError):
        ScrambleKey(2 ** 64)
    assert ScrambleKey(3, "digital_shift").mode is ScrambleMode.DIGITAL_SHIFT


def test_same_key_gives_identical_points(raw_points):
    key = ScrambleKey(77, ScrambleMode.OWEN_NESTED)
    np.testing.assert_array_equal(scramble_points(raw_points, key), scramble_points(raw_points, key))


def test_different_keys_give_different_points(raw_points):
    a = scramble_points(raw_points, ScrambleKey(1, ScrambleMode.OWEN_NESTED))
    b = scramble_points(raw_points, ScrambleKey(2, ScrambleMode.OWEN_NESTED))
    assert not np.array_equal(a, b)


def test_unscrambled_mode_is_plain_sobol(raw_points):
    values = scramble_points(raw_points, ScrambleKey(5, ScrambleMode.NONE))
    np.testing.assert_array_equal(values, raw_points.astype(np.float64) * 2.0 ** -32)


def test_digital_shift_is_an_involution(raw_points):
    shifts = dimension_keys(9, 4) >> np.uint64(32)
    np.testing.assert_array_equal(digital_shift(digital_shift(raw_points, shifts), shifts), raw_points)


def test_outputs_lie_in_unit_interval(raw_points):
    for mode in ScrambleMode:
        values = scramble_points(raw_points, ScrambleKey(11, mode))
        assert values.min() >= 0.0 and values.max() < 1.0


@pytest.mark.parametrize("mode", [ScrambleMode.OWEN_NESTED, ScrambleMode.DIGITAL_SHIFT])
def test_scrambled_points_are_uniform_across_keys(raw_points, mode):
    samples = np.array([scramble_points(raw_points, ScrambleKey(seed, mode))[5] for seed in range(500)])
    p_values = [stats.kstest(samples[:, j], "uniform").pvalue for j in range(4)]
    # Bonferroni over the four coordinates at level 0.01
    assert min(p_values) > 0.01 / 4

"""
Tests for the MC and RQMC batch samplers.
"""

import numpy as np
import pytest

from qmc_dbdp.exceptions import ConfigurationError, ContractViolation
from qmc_dbdp.lowdisc.batches import PointBatch
from qmc_dbdp.lowdisc.samplers import (
    MonteCarloSampler,
    RQMCSampler,
    SamplerFactory,
    mc_points,
    uniform_box,
)
from qmc_dbdp.lowdisc.scramble import ScrambleMode


def test_mc_points_shape_range_and_determinism():
    a = mc_points(3, 100, 4)
    assert (a.m, a.s) == (100, 4)
    assert a.values.min() > 0.0 and a.values.max() < 1.0
    np.testing.assert_array_equal(a.values, mc_points(3, 100, 4).values)
    with pytest.raises(ContractViolation):
        mc_points(3, 0, 4)


@pytest.mark.parametrize("kind", ["mc", "rqmc"])
def test_batches_depend_only_on_stream(kind):
    sampler = SamplerFactory().create_sampler(kind, 99)
    a = sampler.uniforms(64, 3, (2, 0, 1)).values
    sampler.uniforms(64, 3, (2, 0, 0))
    b = SamplerFactory().create_sampler(kind, 99).uniforms(64, 3, (2, 0, 1)).values
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, sampler.uniforms(64, 3, (2, 0, 2)).values)


def test_rqmc_batches_are_stratified():
    batch = RQMCSampler(5).uniforms(256, 6, (2, 1, 0))
    digits = np.floor(batch.values * 256).astype(np.int64)
    for j in range(6):
        assert np.array_equal(np.sort(digits[:, j]), np.arange(256))


def test_normals_have_expected_moments():
    normals = MonteCarloSampler(1).normals(20_000, 2, (1,)).values
    assert abs(normals.mean()) < 0.03
    assert abs(normals.std() - 1.0) < 0.03


def test_factory():
    factory = SamplerFactory()
    assert set(factory.get_supported_kinds()) == {"mc", "rqmc"}
    sampler = factory.create_sampler("rqmc", 0, ScrambleMode.DIGITAL_SHIFT)
    assert isinstance(sampler, RQMCSampler) and sampler.scramble is ScrambleMode.DIGITAL_SHIFT
    with pytest.raises(ConfigurationError, match=r"lhs \(supported: mc, rqmc\)"):
        factory.create_sampler("lhs", 0)


def test_uniform_box():
    values = uniform_box(PointBatch(np.array([[0.25, 0.75]])), -0.5, 0.5)
    np.testing.assert_allclose(values, [[-0.25, 0.25]])


def test_point_batch_is_read_only():
    batch = PointBatch(np.full((2, 2), 0.5))
    with pytest.raises(ValueError):
        batch.values[0, 0] = 0.1
    with pytest.raises(ContractViolation):
        PointBatch(np.zeros((2, 2)))


def _product_integrand(u: np.ndarray) -> np.ndarray:
    # exact integral over the unit cube is 1
    return np.prod(1.0 + (u - 0.5), axis=1)


def test_rqmc_integrates_a_smooth_product_far_better_than_mc():
    m, s, replications = 4096, 6, 32
    errors = {"mc": [], "rqmc": []}
    for rep in range(replications):
        for kind in errors:
            sampler = SamplerFactory().create_sampler(kind, rep)
            estimate = _product_integrand(sampler.uniforms(m, s, (0,)).values).mean()
            errors[kind].append(estimate - 1.0)
    rmse = {kind: float(np.sqrt(np.mean(np.square(e)))) for kind, e in errors.items()}
    assert rmse["rqmc"] * 4.0 <= rmse["mc"]

"""
Tests for networks: shapes, gradients, parameter bounds and batch normalization.
"""

import numpy as np
import pytest

from qmc_dbdp.exceptions import ContractViolation
from qmc_dbdp.net.batchnorm import BatchNormState, bn_forward
from qmc_dbdp.net.network import (
    Network,
    NetworkSpec,
    Parameters,
    forward,
    lipschitz_constants,
    project_params,
    xavier_init,
)


def _random_spec(rng, max_layers=8) -> NetworkSpec:
    n_layers = int(rng.integers(2, max_layers + 1))
    return NetworkSpec(tuple(int(n) for n in rng.integers(1, 5, size=n_layers)))


def _loss(network: Network, X: np.ndarray, R: np.ndarray) -> float:
    out, _ = network.forward(X)
    return float(np.sum(out * R))


def _finite_difference(network: Network, X: np.ndarray, R: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    theta = network.trainable_vector()
    grad = np.zeros_like(theta)
    for k in range(theta.shape[0]):
        shifted = theta.copy()
        shifted[k] += eps
        network.set_trainable_vector(shifted)
        plus = _loss(network, X, R)
        shifted[k] -= 2.0 * eps
        network.set_trainable_vector(shifted)
        minus = _loss(network, X, R)
        grad[k] = (plus - minus) / (2.0 * eps)
    network.set_trainable_vector(theta)
    return grad


def _relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    return float(np.max(np.abs(analytic - numeric)) / max(np.max(np.abs(numeric)), 1e-3))


@pytest.mark.parametrize("batch_norm, tolerance", [(False, 1e-5), (True, 1e-4)])
def test_backward_matches_finite_differences(rng, batch_norm, tolerance):
    for _ in range(20):
        spec = _random_spec(rng)
        network = Network(spec, Parameters(spec, 0.7 * rng.standard_normal(spec.param_count)), batch_norm)
        if batch_norm:
            theta = network.trainable_vector()
            theta[spec.param_count:] += 0.3 * rng.standard_normal(network.bn.affine_count)
            network.set_trainable_vector(theta)
        X = rng.standard_normal((16, spec.input_dim))
        R = rng.standard_normal((16, spec.output_dim))

        out, cache = network.forward(X)
        analytic = network.backward(cache, R)
        numeric = _finite_difference(network, X, R)
        assert analytic.shape == (network.trainable_count,)
        assert _relative_error(analytic, numeric) <= tolerance, spec.layer_sizes


def test_parameter_lipschitz_and_sup_bounds(rng):
    violations = 0
    for _ in range(1000):
        spec = NetworkSpec(
            (int(rng.integers(1, 4)),) + tuple(int(n) for n in rng.integers(1, 5, size=int(rng.integers(1, 3)))) + (1,)
        )
        R = float(rng.uniform(1.0, 3.0))
        constants = lipschitz_constants(spec, R)
        theta_1 = Parameters(spec, rng.uniform(-R, R, spec.param_count))
        theta_2 = Parameters(spec, rng.uniform(-R, R, spec.param_count))
        x = rng.uniform(-3.0, 3.0, (1, spec.input_dim))

        u_1 = forward(spec, theta_1, None, x)[0][0, 0]
        u_2 = forward(spec, theta_2, None, x)[0][0, 0]
        scale = max(np.max(np.abs(x)), 1.0)
        distance = np.max(np.abs(theta_1.flat - theta_2.flat))
        if abs(u_1 - u_2) > constants.C_SR * scale * distance * (1 + 1e-12):
            violations += 1
        if abs(u_1) > constants.B_SR * (1 + 1e-12):
            violations += 1
    assert violations == 0


def test_lipschitz_constant_examples():
    c = lipschitz_constants(NetworkSpec((1, 1)), 1.0)
    assert (c.C_SR, c.B_SR) == (2.0, 2.0)
    c = lipschitz_constants(NetworkSpec((2, 3, 1)), 2.0)
    assert (c.C_SR, c.B_SR) == (78.0, 12.0)
    with pytest.raises(ContractViolation):
        lipschitz_constants(NetworkSpec((2, 1)), 0.0)


def test_spec_build_and_counts():
    spec = NetworkSpec.build(10, 1, 30, 4)
    assert spec.layer_sizes == (10, 30, 30, 30, 1)
    assert spec.depth == 4
    assert spec.width == 30
    assert NetworkSpec((2, 3, 1)).param_count == 13
    with pytest.raises(ContractViolation):
        NetworkSpec((3,))


def test_zero_parameters_give_zero_output():
    spec = NetworkSpec((3, 4, 2))
    out, _ = forward(spec, Parameters.zeros(spec), None, np.ones((5, 3)))
    np.testing.assert_array_equal(out, np.zeros((5, 2)))


def test_xavier_init_is_bounded_and_deterministic():
    spec = NetworkSpec((4, 6, 1))
    params = xavier_init(spec, 17)
    assert params == xavier_init(spec, 17)
    assert np.max(np.abs(params.weight(0))) <= np.sqrt(6.0 / 10.0)
    np.testing.assert_array_equal(params.bias(0), np.zeros(6))


def test_project_params_clips():
    spec = NetworkSpec((1, 1))
    projected = project_params(Parameters(spec, [5.0, -5.0]), 2.0)
    np.testing.assert_array_equal(projected.flat, [2.0, -2.0])


def test_stale_cache_is_rejected(rng):
    spec = NetworkSpec((2, 3, 1))
    network = Network(spec, xavier_init(spec, 1))
    _, cache = network.forward(rng.standard_normal((4, 2)))
    network.set_trainable_vector(network.trainable_vector() + 0.1)
    with pytest.raises(ContractViolation):
        network.backward(cache, np.ones((4, 1)))


def test_input_width_is_checked():
    spec = NetworkSpec((2, 1))
    with pytest.raises(ContractViolation):
        forward(spec, Parameters.zeros(spec), None, np.ones((3, 5)))


def test_predict_leaves_running_statistics_alone(rng):
    spec = NetworkSpec((2, 4, 1))
    network = Network(spec, xavier_init(spec, 3), batch_norm=True)
    before = network.bn.running_vector().copy()
    network.predict(rng.standard_normal((8, 2)))
    np.testing.assert_array_equal(network.bn.running_vector(), before)


def test_batchnorm_running_statistics_update(rng):
    state = BatchNormState((3,))
    a = rng.standard_normal((10, 3)) + 2.0
    out, _ = bn_forward(state, 0, a)
    np.testing.assert_allclose(out.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(state.running_mean[0], 0.1 * a.mean(axis=0))
    np.testing.assert_allclose(state.running_var[0], 0.9 + 0.1 * a.var(axis=0, ddof=1))


def test_batchnorm_needs_two_samples_in_training():
    with pytest.raises(ContractViolation):
        bn_forward(BatchNormState((2,)), 0, np.ones((1, 2)))
    state = BatchNormState((2,))
    state.eval()
    out, _ = bn_forward(state, 0, np.ones((1, 2)))
    assert out.shape == (1, 2)


def test_running_variances_must_be_non_negative():
    state = BatchNormState((2,))
    with pytest.raises(ContractViolation):
        state.set_running_vector(np.array([0.0, 0.0, -1.0, 1.0]))

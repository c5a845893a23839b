"""
DBDP Scheme

One-step quantities of the backward scheme: the map
F(t, x, y, z, h, dW) = y - f(t, x, y, z) h + z . dW and the squared-residual
step loss with its gradients for the (U_i, Z_i) network pair.
"""

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from qmc_dbdp.exceptions import ContractViolation, TrainingAbortedError
from qmc_dbdp.net.network import Network
from qmc_dbdp.problems.base_problem import BaseProblem, DriverValue, PathSlice, as_batch

logger = logging.getLogger(__name__)

# Frozen evaluation handle for the next-step value: m x d points -> (m,) values.
Target = Callable[[np.ndarray], np.ndarray]


@dataclass
class StepNetworks:
    """
    The (U_i, Z_i) pair of one time step.

    ``u_net`` maps R^d to R and ``z_net`` maps R^d to R^d; both share their
    hidden layer sizes.
    """

    u_net: Network
    z_net: Network

    def __post_init__(self):
        u_spec, z_spec = self.u_net.spec, self.z_net.spec
        if u_spec.output_dim != 1 or z_spec.output_dim != z_spec.input_dim:
            raise ContractViolation(f"Expected (d -> 1, d -> d) networks, got {u_spec.layer_sizes} / {z_spec.layer_sizes}")
        if u_spec.layer_sizes[:-1] != z_spec.layer_sizes[:-1]:
            raise ContractViolation("U and Z networks must share their input and hidden sizes")

    def train(self):
        self.u_net.train()
        self.z_net.train()

    def eval(self):
        self.u_net.eval()
        self.z_net.eval()

    def copy(self) -> "StepNetworks":
        return StepNetworks(self.u_net.copy(), self.z_net.copy())


class TerminalTarget:
    """The terminal condition g used as target of the last step."""

    def __init__(self, problem: BaseProblem):
        self.problem = problem

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.problem.terminal(x)


class NetworkTarget:
    """A trained U network, frozen in evaluation mode."""

    def __init__(self, network: Network):
        self.network = network.copy()
        self.network.eval()

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.network.predict(x)[:, 0]


def scheme_F(problem: BaseProblem, t: float, x: np.ndarray, y: np.ndarray, z: np.ndarray, h: float, dW: np.ndarray):
    """
    Batch version of F returning the values and the driver evaluation.

    Returns:
        Tuple[np.ndarray, DriverValue]: F values of shape ``(m,)`` and f with its partials
    """
    driver: DriverValue = problem.driver(t, x, y, z)
    return y - driver.f * h + np.sum(z * dW, axis=1), driver


def F(problem: BaseProblem, t: float, x, y, z, h: float, dW):
    """
    F(t, x, y, z, h, dW) = y - f(t, x, y, z) h + z . dW.

    Accepts one point (returns a float) or a batch (returns an array).
    """
    x_batch, single = as_batch(x)
    z_batch, _ = as_batch(z)
    dW_batch, _ = as_batch(dW)
    y_batch = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if z_batch.shape != x_batch.shape or dW_batch.shape != x_batch.shape:
        raise ContractViolation(f"x, z and dW must share their shape, got {x_batch.shape}, {z_batch.shape}, {dW_batch.shape}")
    values, _ = scheme_F(problem, t, x_batch, y_batch, z_batch, h, dW_batch)
    return float(values[0]) if single else values


@dataclass
class StepLoss:
    """Loss of one batch and the gradients of the trainable vectors of U_i and Z_i."""

    loss: float
    grad_u: np.ndarray
    grad_z: np.ndarray
    residual: np.ndarray


def step_loss(
    problem: BaseProblem,
    U_next: Target,
    nets: StepNetworks,
    path: PathSlice,
    t_i: float,
    dt_i: float,
) -> StepLoss:
    """
    Mean of H^2 with H = U_next(X_{i+1}) - F(t_i, X_i, U_i(X_i), Z_i(X_i), dt_i, dW).

    ``U_next`` is a constant of the loss; gradients flow only through U_i and Z_i.

    Args:
        problem (BaseProblem): Problem supplying the driver
        U_next (Target): Terminal condition or frozen trained network
        nets (StepNetworks): Networks being trained
        path (PathSlice): Simulated batch
        t_i (float): Current time node
        dt_i (float): Step length

    Raises:
        TrainingAbortedError: If the loss is not finite
    """
    X_i = path.X_i
    m = X_i.shape[0]

    u_out, u_cache = nets.u_net.forward(X_i)
    z_out, z_cache = nets.z_net.forward(X_i)
    y = u_out[:, 0]
    target = np.asarray(U_next(path.X_ip1), dtype=np.float64)

    F_values, driver = scheme_F(problem, t_i, X_i, y, z_out, dt_i, path.dW)
    H = target - F_values
    loss = float(np.mean(H * H))
    if not np.isfinite(loss):
        raise TrainingAbortedError("Non-finite step loss")

    dL_dF = -2.0 * H / m
    dL_dy = dL_dF * (1.0 - dt_i * driver.df_dy)
    dL_dz = dL_dF[:, None] * (path.dW - dt_i * driver.df_dz)

    grad_u = nets.u_net.backward(u_cache, dL_dy[:, None])
    grad_z = nets.z_net.backward(z_cache, dL_dz)
    return StepLoss(loss=loss, grad_u=grad_u, grad_z=grad_z, residual=H)

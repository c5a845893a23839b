"""
Nonlinear Heat Problem

Drift mu 1_d, diffusion sigma I_d, terminal condition cos(sum x) and
solution u(t, x) = cos(sum x) e^{(T-t)/2}.
"""

import logging
import math

import numpy as np

from qmc_dbdp.problems.base_problem import BaseProblem, DriverValue, ProblemKind, ProblemSpec, quadratic_coupling

logger = logging.getLogger(__name__)


class ArithmeticMotionProblem(BaseProblem):
    """
    Problems driven by X_t = eta + mu t 1_d + sigma W_t.
    """

    def state_at(self, eta: np.ndarray, t: float, W_t: np.ndarray) -> np.ndarray:
        return eta + self.mu * t + self.sigma * W_t

    def advance(self, X: np.ndarray, dt: float, dW: np.ndarray) -> np.ndarray:
        return X + self.mu * dt + self.sigma * dW

    def drift(self, x: np.ndarray) -> np.ndarray:
        return np.full_like(x, self.mu)

    def diffusion_diag(self, x: np.ndarray) -> np.ndarray:
        return np.full_like(x, self.sigma)


class HeatProblem(ArithmeticMotionProblem):
    """
    Nonlinear heat equation.

    The driver is only consistent with the solution when sigma^2 d = 1, which
    the default sigma = 1/sqrt(d) satisfies.
    """

    kind = ProblemKind.HEAT

    def __init__(self, spec: ProblemSpec):
        super().__init__(spec)
        if not math.isclose(self.sigma ** 2 * self.d, 1.0, rel_tol=1e-12):
            logger.warning(
                "Heat problem with sigma^2 d = %.6g != 1: cos(sum x) e^{(T-t)/2} is no longer the exact solution",
                self.sigma ** 2 * self.d,
            )

    def driver(self, t: float, x: np.ndarray, y: np.ndarray, z: np.ndarray) -> DriverValue:
        xbar = np.sum(x, axis=1)
        decay = math.exp((self.T - t) / 2.0)
        sin, cos = np.sin(xbar), np.cos(xbar)
        forcing = (cos + self.mu * self.d * sin) * decay - 0.5 * (
            self.sigma * math.sqrt(self.d) * sin * cos * decay * decay
        ) ** 2
        coupling = quadratic_coupling(y, z, self.d)
        return DriverValue(forcing + coupling.f, coupling.df_dy, coupling.df_dz)

    def terminal(self, x: np.ndarray) -> np.ndarray:
        return np.cos(np.sum(x, axis=1))

    def exact_solution(self, t: float, x: np.ndarray) -> np.ndarray:
        return np.cos(np.sum(x, axis=1)) * math.exp((self.T - t) / 2.0)

    def exact_z(self, t: float, x: np.ndarray) -> np.ndarray:
        grad = -np.sin(np.sum(x, axis=1)) * math.exp((self.T - t) / 2.0)
        return self.sigma * np.repeat(grad[:, None], x.shape[1], axis=1)

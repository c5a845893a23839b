"""
Nonlinear Black-Scholes Problems

Drift mu x, diffusion sigma diag(x). Two drivers share the geometric state
process: ``bs1`` with solution cos(sum x) e^{(T-t)/2} and ``bs2`` with
solution Phi(sum x) e^{(T-t)/2}.
"""

import logging
import math

import numpy as np

from qmc_dbdp.lowdisc.normal import normal_cdf, normal_pdf
from qmc_dbdp.problems.base_problem import BaseProblem, DriverValue, ProblemKind, quadratic_coupling

logger = logging.getLogger(__name__)


class GeometricMotionProblem(BaseProblem):
    """
    Problems driven by X_{t,k} = eta_k exp((mu - sigma^2/2) t + sigma W_{t,k}).
    """

    def state_at(self, eta: np.ndarray, t: float, W_t: np.ndarray) -> np.ndarray:
        return eta * np.exp((self.mu - 0.5 * self.sigma ** 2) * t + self.sigma * W_t)

    def advance(self, X: np.ndarray, dt: float, dW: np.ndarray) -> np.ndarray:
        return X * np.exp((self.mu - 0.5 * self.sigma ** 2) * dt + self.sigma * dW)

    def drift(self, x: np.ndarray) -> np.ndarray:
        return self.mu * x

    def diffusion_diag(self, x: np.ndarray) -> np.ndarray:
        return self.sigma * x


class BlackScholesCosProblem(GeometricMotionProblem):
    """Black-Scholes problem with terminal condition cos(sum x)."""

    kind = ProblemKind.BS1

    def driver(self, t: float, x: np.ndarray, y: np.ndarray, z: np.ndarray) -> DriverValue:
        xbar = np.sum(x, axis=1)
        sq_norm = np.sum(x * x, axis=1)
        decay = math.exp((self.T - t) / 2.0)
        sin, cos = np.sin(xbar), np.cos(xbar)
        forcing = (0.5 * cos + self.mu * xbar * sin + 0.5 * self.sigma ** 2 * sq_norm * cos) * decay - (
            self.sigma * xbar * cos * sin * decay * decay
        ) ** 2 / (2.0 * self.d)
        coupling = quadratic_coupling(y, z, self.d)
        return DriverValue(forcing + coupling.f, coupling.df_dy, coupling.df_dz)

    def terminal(self, x: np.ndarray) -> np.ndarray:
        return np.cos(np.sum(x, axis=1))

    def exact_solution(self, t: float, x: np.ndarray) -> np.ndarray:
        return np.cos(np.sum(x, axis=1)) * math.exp((self.T - t) / 2.0)

    def exact_z(self, t: float, x: np.ndarray) -> np.ndarray:
        grad = -np.sin(np.sum(x, axis=1)) * math.exp((self.T - t) / 2.0)
        return self.sigma * x * grad[:, None]


class BlackScholesCdfProblem(GeometricMotionProblem):
    """Black-Scholes problem with terminal condition Phi(sum x)."""

    kind = ProblemKind.BS2

    def driver(self, t: float, x: np.ndarray, y: np.ndarray, z: np.ndarray) -> DriverValue:
        xbar = np.sum(x, axis=1)
        sq_norm = np.sum(x * x, axis=1)
        decay = math.exp((self.T - t) / 2.0)
        cdf, pdf = normal_cdf(xbar), normal_pdf(xbar)
        forcing = (0.5 * cdf - self.mu * xbar * pdf + 0.5 * self.sigma ** 2 * sq_norm * xbar * pdf) * decay - (
            self.sigma * xbar * pdf * cdf * decay * decay
        ) ** 2 / (2.0 * self.d)
        coupling = quadratic_coupling(y, z, self.d)
        return DriverValue(forcing + coupling.f, coupling.df_dy, coupling.df_dz)

    def terminal(self, x: np.ndarray) -> np.ndarray:
        return normal_cdf(np.sum(x, axis=1))

    def exact_solution(self, t: float, x: np.ndarray) -> np.ndarray:
        return normal_cdf(np.sum(x, axis=1)) * math.exp((self.T - t) / 2.0)

    def exact_z(self, t: float, x: np.ndarray) -> np.ndarray:
        grad = normal_pdf(np.sum(x, axis=1)) * math.exp((self.T - t) / 2.0)
        return self.sigma * x * grad[:, None]

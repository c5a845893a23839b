"""
Hamilton-Jacobi-Bellman Problem

du/dt + Laplacian u = ||grad u||^2 with u(T, x) = ||x||^{1/2}.

As a BSDE this is M = 0, Sigma = sqrt(2) I and f(t, x, y, z) = -||z||^2 / 2
(z = sqrt(2) grad u, so ||grad u||^2 = ||z||^2 / 2). There is no closed form;
the Cole-Hopf transform gives

    u(t, x) = -ln E[exp(-||x + sqrt(2) W_{T-t}||^{1/2})],

which is estimated by Monte Carlo.
"""

import logging
import math
from typing import Optional

import numpy as np

from qmc_dbdp.exceptions import ConfigurationError
from qmc_dbdp.problems.base_problem import (
    DriverValue,
    McReferenceConfig,
    ProblemKind,
    ProblemSpec,
    ReferenceEstimate,
    as_batch,
)
from qmc_dbdp.problems.heat import ArithmeticMotionProblem
from qmc_dbdp.utils.seeding import STREAM_REFERENCE, derive_generator

logger = logging.getLogger(__name__)

POINT_BLOCK = 64


class HJBProblem(ArithmeticMotionProblem):
    """HJB equation with a Monte Carlo Cole-Hopf reference."""

    kind = ProblemKind.HJB
    has_closed_form = False

    def __init__(self, spec: ProblemSpec):
        super().__init__(spec)
        if self.mu != 0.0 or not math.isclose(self.sigma, math.sqrt(2.0), rel_tol=1e-12):
            raise ConfigurationError(
                f"The hjb problem needs mu = 0 and sigma = sqrt(2), got mu={self.mu}, sigma={self.sigma}"
            )

    def driver(self, t: float, x: np.ndarray, y: np.ndarray, z: np.ndarray) -> DriverValue:
        value = -0.5 * np.sum(z * z, axis=1)
        return DriverValue(value, np.zeros_like(value), -z)

    def terminal(self, x: np.ndarray) -> np.ndarray:
        return np.sqrt(np.linalg.norm(x, axis=1))

    def reference_solution(
        self, x, t: float = 0.0, mc_config: Optional[McReferenceConfig] = None
    ) -> ReferenceEstimate:
        """
        Cole-Hopf Monte Carlo estimate of u(t, x) with delta-method standard errors.

        The same Brownian samples are shared by all points of a call; samples
        are drawn in chunks from streams derived from ``mc_config.seed`` and the
        chunk index, and accumulated in chunk order.
        """
        config = mc_config or McReferenceConfig()
        x_batch, _ = as_batch(x)
        tau = self.T - t
        if tau <= 0.0:
            values = self.terminal(x_batch)
            return ReferenceEstimate(values=values, stderr=np.zeros_like(values))

        n_points = x_batch.shape[0]
        sum_e = np.zeros(n_points)
        sum_e2 = np.zeros(n_points)
        scale = math.sqrt(2.0 * tau)
        n_chunks = -(-config.samples // config.chunk)
        logger.debug("HJB reference: %d points, %d samples in %d chunks", n_points, config.samples, n_chunks)

        for chunk in range(n_chunks):
            size = min(config.chunk, config.samples - chunk * config.chunk)
            W = derive_generator(config.seed, STREAM_REFERENCE, chunk).standard_normal((size, self.d))
            for lo in range(0, n_points, POINT_BLOCK):
                block = x_batch[lo:lo + POINT_BLOCK]
                shifted = block[:, None, :] + scale * W[None, :, :]
                e = np.exp(-np.sqrt(np.linalg.norm(shifted, axis=2)))
                sum_e[lo:lo + POINT_BLOCK] += e.sum(axis=1)
                sum_e2[lo:lo + POINT_BLOCK] += (e * e).sum(axis=1)

        n = config.samples
        mean = sum_e / n
        var = np.maximum(sum_e2 - n * mean * mean, 0.0) / max(n - 1, 1)
        stderr = np.sqrt(var / n) / mean
        return ReferenceEstimate(values=-np.log(mean), stderr=stderr)

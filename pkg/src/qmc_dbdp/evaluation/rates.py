"""
Quadrature Rate Probes

Empirical convergence rates of MC and RQMC estimates of a fixed-parameter
risk. With the networks frozen, the empirical step risk L_m(theta) is a
quadrature of the integrand G(Phi^{-1}(u); theta) over (0,1)^{3d}; its RMSE
against a high-accuracy oracle, fitted on a log-log scale, is the measurable
proxy of the generalization error rate (the supremum over theta is not
computed).
"""

import abc
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from qmc_dbdp.dbdp.scheme import StepNetworks, Target, scheme_F
from qmc_dbdp.exceptions import ContractViolation
from qmc_dbdp.lowdisc.batches import PointBatch
from qmc_dbdp.lowdisc.normal import to_normals
from qmc_dbdp.lowdisc.samplers import SamplerFactory
from qmc_dbdp.lowdisc.scramble import ScrambleKey, ScrambleMode
from qmc_dbdp.lowdisc.sobol import SobolGenerator, sobol_points
from qmc_dbdp.problems.base_problem import BaseProblem
from qmc_dbdp.utils.seeding import STREAM_PROBE, derive_seed

logger = logging.getLogger(__name__)

DEFAULT_ORACLE_M = 1 << 22
ORACLE_CHUNK = 1 << 16
# rmse values at or below this are treated as exact quadrature
DEGENERATE_RMSE = 1e-15


class Integrand(abc.ABC):
    """Function on (0,1)^s evaluated on uniform batches."""

    dimension: int
    exact: Optional[float] = None

    @abc.abstractmethod
    def __call__(self, uniforms: PointBatch) -> np.ndarray:
        """Per-point values, shape ``(m,)``."""


class StepRiskIntegrand(Integrand):
    """
    Squared step residual H^2 as a function of the 3d uniforms, with frozen networks.

    Args:
        problem (BaseProblem): Problem supplying the paths and driver
        nets (StepNetworks): Frozen (U_i, Z_i), evaluated in evaluation mode
        U_next (Target): Frozen next-step target
        t_i (float): Time node
        dt_i (float): Step length
    """

    def __init__(self, problem: BaseProblem, nets: StepNetworks, U_next: Target, t_i: float, dt_i: float):
        self.problem = problem
        self.nets = nets.copy()
        self.nets.eval()
        self.U_next = U_next
        self.t_i = t_i
        self.dt_i = dt_i
        self.dimension = 3 * problem.d

    def __call__(self, uniforms: PointBatch) -> np.ndarray:
        path = self.problem.simulate_slice(to_normals(uniforms), self.t_i, self.dt_i)
        y = self.nets.u_net.predict(path.X_i)[:, 0]
        z = self.nets.z_net.predict(path.X_i)
        F_values, _ = scheme_F(self.problem, self.t_i, path.X_i, y, z, self.dt_i, path.dW)
        H = self.U_next(path.X_ip1) - F_values
        return H * H


class GenzProductPeak(Integrand):
    """
    Genz product-peak integrand prod_j 1 / (c_j^{-2} + (u_j - w_j)^2), normalized to integral 1.

    Args:
        dimension (int): Number of coordinates
        c (float): Peak sharpness
        w (float): Peak location
    """

    def __init__(self, dimension: int, c: float = 1.0, w: float = 0.5):
        self.dimension = dimension
        self.c = c
        self.w = w
        per_coordinate = c * (math.atan(c * (1.0 - w)) + math.atan(c * w))
        self._scale = per_coordinate ** -dimension
        self.exact = 1.0

    def __call__(self, uniforms: PointBatch) -> np.ndarray:
        u = uniforms.values
        return self._scale * np.prod(1.0 / (self.c ** -2 + (u - self.w) ** 2), axis=1)


class ConstantIntegrand(Integrand):
    """Integrand equal to ``value`` everywhere."""

    def __init__(self, dimension: int, value: float = 1.0):
        self.dimension = dimension
        self.value = value
        self.exact = value

    def __call__(self, uniforms: PointBatch) -> np.ndarray:
        return np.full(uniforms.m, self.value)


@dataclass
class RateProbeResult:
    """
    RMSE of the m-point estimate against the oracle, per m.

    ``fitted_slope`` is None when every RMSE vanishes (``degenerate``).
    """

    sampler: str
    m_values: List[int]
    rmse_values: List[float]
    fitted_slope: Optional[float]
    oracle_value: float
    replications: int

    @property
    def degenerate(self) -> bool:
        return self.fitted_slope is None

    def rmse_at(self, m: int) -> float:
        return self.rmse_values[self.m_values.index(m)]


def fit_rate(m_list: Sequence[int], rmse_list: Sequence[float]) -> float:
    """
    Least-squares slope of log2 RMSE against log2 m.

    Raises:
        ContractViolation: With fewer than 3 points or a non-positive RMSE
    """
    m = np.asarray(m_list, dtype=np.float64)
    rmse = np.asarray(rmse_list, dtype=np.float64)
    if m.shape != rmse.shape or m.shape[0] < 3:
        raise ContractViolation(f"Need at least 3 matching (m, rmse) pairs, got {m.shape[0]} / {rmse.shape[0]}")
    if np.any(rmse <= 0) or np.any(m <= 0):
        raise ContractViolation("Rate fitting needs positive m and RMSE values")
    slope, _ = np.polyfit(np.log2(m), np.log2(rmse), 1)
    return float(slope)


def oracle_value(integrand: Integrand, oracle_m: int = DEFAULT_ORACLE_M, seed: int = 0) -> float:
    """
    Reference value of the integral: the exact one when known, otherwise an
    Owen-scrambled Sobol' estimate with ``oracle_m`` points accumulated in chunks.
    """
    if integrand.exact is not None:
        return float(integrand.exact)

    gen = SobolGenerator(integrand.dimension)
    key = ScrambleKey(derive_seed(seed, STREAM_PROBE, 0), ScrambleMode.OWEN_NESTED)
    total = 0.0
    remaining = oracle_m
    while remaining > 0:
        chunk = min(ORACLE_CHUNK, remaining)
        total += float(np.sum(integrand(sobol_points(gen, key, chunk))))
        remaining -= chunk
    value = total / oracle_m
    logger.info("Oracle value %.10e from %d scrambled Sobol' points", value, oracle_m)
    return value


def _check_m_list(m_list: Sequence[int]):
    if not m_list:
        raise ContractViolation("m_list must not be empty")
    for m in m_list:
        if m < 1 or m & (m - 1):
            raise ContractViolation(f"m values must be powers of two, got {m}")
    if any(b <= a for a, b in zip(m_list[:-1], m_list[1:])):
        raise ContractViolation("m values must be strictly increasing")


def integrand_rate_probe(
    integrand: Integrand,
    sampler_kind: str,
    m_list: Sequence[int],
    replications: int,
    seed: int = 0,
    oracle: Optional[float] = None,
    oracle_m: int = DEFAULT_ORACLE_M,
    scramble: ScrambleMode = ScrambleMode.OWEN_NESTED,
) -> RateProbeResult:
    """
    RMSE over ``replications`` independent m-point estimates, for every m.

    Args:
        integrand (Integrand): Function on the unit cube
        sampler_kind (str): ``mc`` or ``rqmc``
        m_list (Sequence[int]): Strictly increasing powers of two
        replications (int): Independent randomizations per m
        seed (int): Master seed of the probe
        oracle (Optional[float]): Precomputed oracle value
        oracle_m (int): Oracle size when ``oracle`` is not given
        scramble (ScrambleMode): RQMC randomization
    """
    m_list = [int(m) for m in m_list]
    _check_m_list(m_list)
    if replications < 2:
        raise ContractViolation(f"Need at least 2 replications, got {replications}")
    if oracle is None:
        oracle = oracle_value(integrand, oracle_m, seed)

    sampler = SamplerFactory().create_sampler(sampler_kind, derive_seed(seed, STREAM_PROBE, 1), scramble)
    rmse_values = []
    for m in m_list:
        level = m.bit_length() - 1
        squared = [
            (float(np.mean(integrand(sampler.uniforms(m, integrand.dimension, (STREAM_PROBE, level, r))))) - oracle) ** 2
            for r in range(replications)
        ]
        rmse_values.append(math.sqrt(sum(squared) / replications))
        logger.debug("%s m=%d: rmse %.4e", sampler_kind, m, rmse_values[-1])

    if all(r <= DEGENERATE_RMSE for r in rmse_values):
        logger.warning("All %s RMSE values vanish: the integrand is integrated exactly, no rate to fit", sampler_kind)
        slope = None
        rmse_values = [0.0] * len(m_list)
    elif len(m_list) < 3:
        slope = None
    else:
        slope = fit_rate(m_list, [max(r, DEGENERATE_RMSE) for r in rmse_values])
        logger.info("%s fitted rate: slope %.3f over m = %d..%d", sampler_kind, slope, m_list[0], m_list[-1])

    return RateProbeResult(
        sampler=sampler_kind,
        m_values=m_list,
        rmse_values=rmse_values,
        fitted_slope=slope,
        oracle_value=oracle,
        replications=replications,
    )


def quadrature_rate_probe(
    problem: BaseProblem,
    nets: StepNetworks,
    U_next: Target,
    t_i: float,
    dt_i: float,
    sampler_kind: str,
    m_list: Sequence[int],
    replications: int,
    oracle_m: int = DEFAULT_ORACLE_M,
    seed: int = 0,
    oracle: Optional[float] = None,
    scramble: ScrambleMode = ScrambleMode.OWEN_NESTED,
) -> RateProbeResult:
    """
    Rate probe of the step risk L_i(theta) with frozen networks.

    See ``integrand_rate_probe`` for the arguments shared with generic integrands.
    """
    integrand = StepRiskIntegrand(problem, nets, U_next, t_i, dt_i)
    return integrand_rate_probe(
        integrand, sampler_kind, m_list, replications, seed=seed, oracle=oracle, oracle_m=oracle_m, scramble=scramble
    )


def compare_samplers(
    integrand: Integrand,
    m_list: Sequence[int],
    replications: int,
    seed: int = 0,
    oracle_m: int = DEFAULT_ORACLE_M,
    scramble: ScrambleMode = ScrambleMode.OWEN_NESTED,
) -> Dict[str, RateProbeResult]:
    """MC and RQMC probes of one integrand sharing a single oracle value."""
    oracle = oracle_value(integrand, oracle_m, seed)
    return {
        kind: integrand_rate_probe(integrand, kind, m_list, replications, seed, oracle=oracle, scramble=scramble)
        for kind in ("mc", "rqmc")
    }

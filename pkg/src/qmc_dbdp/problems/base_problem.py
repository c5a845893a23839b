"""
Base Problem

Common interface of the benchmark PDE/BSDE problems: exact path simulation
from a 3d-dimensional normal batch, the driver f with its partial derivatives
in (y, z), the terminal condition g and a reference solution.

All point-wise functions are vectorized over a batch: ``x`` and ``z`` are
``m x d`` arrays and ``y`` has shape ``(m,)``.
"""

import abc
import enum
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np

from qmc_dbdp.exceptions import ContractViolation
from qmc_dbdp.lowdisc.batches import NormalBatch
from qmc_dbdp.lowdisc.normal import normal_cdf

logger = logging.getLogger(__name__)


class ProblemKind(str, enum.Enum):
    HEAT = "heat"
    HJB = "hjb"
    BS1 = "bs1"
    BS2 = "bs2"


def default_coefficients(kind: ProblemKind, d: int) -> dict:
    """Domain and SDE coefficients used when a configuration leaves them out."""
    kind = ProblemKind(kind)
    if kind is ProblemKind.HJB:
        return {"a": 0.0, "b": 1.0, "mu": 0.0, "sigma": math.sqrt(2.0)}
    return {"a": -0.5, "b": 0.5, "mu": 0.2 / d, "sigma": 1.0 / math.sqrt(d)}


@dataclass(frozen=True)
class ProblemSpec:
    """
    One PDE instance.

    Args:
        kind (ProblemKind): Benchmark family
        d (int): Spatial dimension
        T (float): Horizon
        a (float): Lower bound of the target box [a, b]^d
        b (float): Upper bound of the target box
        mu (float): Drift scalar
        sigma (float): Volatility scalar
    """

    kind: ProblemKind
    d: int
    T: float
    a: float
    b: float
    mu: float
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "kind", ProblemKind(self.kind))
        if self.d < 1:
            raise ContractViolation(f"Dimension must be at least 1, got {self.d}")
        if not self.T > 0:
            raise ContractViolation(f"Horizon must be positive, got {self.T}")
        if not self.a < self.b:
            raise ContractViolation(f"Domain needs a < b, got [{self.a}, {self.b}]")

    @classmethod
    def create(
        cls,
        kind: Union[str, ProblemKind],
        d: int,
        T: float = 1.0,
        a: Optional[float] = None,
        b: Optional[float] = None,
        mu: Optional[float] = None,
        sigma: Optional[float] = None,
    ) -> "ProblemSpec":
        """Build a spec, filling unspecified values with the per-problem defaults."""
        defaults = default_coefficients(ProblemKind(kind), d)
        return cls(
            kind=ProblemKind(kind),
            d=d,
            T=T,
            a=defaults["a"] if a is None else a,
            b=defaults["b"] if b is None else b,
            mu=defaults["mu"] if mu is None else mu,
            sigma=defaults["sigma"] if sigma is None else sigma,
        )


@dataclass(frozen=True)
class PathSlice:
    """States and Brownian increment of one time step for a batch of paths."""

    eta: np.ndarray
    X_i: np.ndarray
    X_ip1: np.ndarray
    dW: np.ndarray


class DriverValue(NamedTuple):
    """f(t, x, y, z) with its partial derivatives in y and z."""

    f: np.ndarray
    df_dy: np.ndarray
    df_dz: np.ndarray


@dataclass(frozen=True)
class McReferenceConfig:
    """
    Monte Carlo reference settings.

    Args:
        samples (int): Samples per evaluation point
        seed (int): Seed of the reference stream
        chunk (int): Samples drawn at a time
    """

    samples: int = 1 << 17
    seed: int = 0
    chunk: int = 1 << 12


@dataclass(frozen=True)
class ReferenceEstimate:
    """Reference values u(t, x) and their standard errors (zero for closed forms)."""

    values: np.ndarray
    stderr: np.ndarray


def transform_normals(
    W: Union[NormalBatch, np.ndarray], a: float, b: float, t_i: float, dt_i: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Split a 3d-wide normal batch into (eta, W_{t_i}, dW).

    eta = (b - a) Phi(W_{1:d}) + a, W_{t_i} = sqrt(t_i) W_{d+1:2d},
    dW = sqrt(dt_i) W_{2d+1:3d}.

    Raises:
        ContractViolation: If the width is not a multiple of 3
    """
    values = W.values if isinstance(W, NormalBatch) else np.asarray(W, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] % 3 != 0 or values.shape[1] == 0:
        raise ContractViolation(f"Normal batch must have 3d columns, got shape {values.shape}")
    if t_i < 0 or dt_i < 0:
        raise ContractViolation(f"Times must be non-negative, got t_i={t_i}, dt_i={dt_i}")
    d = values.shape[1] // 3
    eta = np.clip((b - a) * normal_cdf(values[:, :d]) + a, a, b)
    W_ti = math.sqrt(t_i) * values[:, d:2 * d]
    dW = math.sqrt(dt_i) * values[:, 2 * d:]
    return eta, W_ti, dW


def quadratic_coupling(y: np.ndarray, z: np.ndarray, d: int) -> DriverValue:
    """(1/(2d)) (y (1 . z))^2 and its partial derivatives."""
    s = np.sum(z, axis=1)
    value = (y * s) ** 2 / (2.0 * d)
    df_dy = y * s * s / d
    df_dz = np.repeat((y * y * s / d)[:, None], z.shape[1], axis=1)
    return DriverValue(value, df_dy, df_dz)


def as_batch(x) -> Tuple[np.ndarray, bool]:
    array = np.asarray(x, dtype=np.float64)
    if array.ndim == 1:
        return array[None, :], True
    return array, False


class BaseProblem(abc.ABC):
    """
    Base class for all benchmark problems.

    Subclasses provide the exact transition of the state process, the driver,
    the terminal condition and (when available) the closed-form solution.

    Args:
        spec (ProblemSpec): Problem instance
    """

    kind: ProblemKind
    has_closed_form = True

    def __init__(self, spec: ProblemSpec):
        if spec.kind is not self.kind:
            raise ContractViolation(f"{type(self).__name__} cannot be built from a {spec.kind.value} spec")
        self.spec = spec
        self.d = spec.d
        self.T = spec.T
        self.a = spec.a
        self.b = spec.b
        self.mu = spec.mu
        self.sigma = spec.sigma

    def simulate_slice(self, normals: Union[NormalBatch, np.ndarray], t_i: float, dt_i: float) -> PathSlice:
        """
        Exact-in-law states at t_i and t_{i+1} for a batch of paths.

        Args:
            normals (NormalBatch): ``m x 3d`` standard normals
            t_i (float): Current time node
            dt_i (float): Step length t_{i+1} - t_i
        """
        width = normals.s if isinstance(normals, NormalBatch) else np.shape(normals)[1]
        if width != 3 * self.d:
            raise ContractViolation(f"Expected {3 * self.d} normal columns for d={self.d}, got {width}")
        eta, W_ti, dW = transform_normals(normals, self.a, self.b, t_i, dt_i)
        X_i = self.state_at(eta, t_i, W_ti)
        X_ip1 = self.advance(X_i, dt_i, dW)
        return PathSlice(eta=eta, X_i=X_i, X_ip1=X_ip1, dW=dW)

    @abc.abstractmethod
    def state_at(self, eta: np.ndarray, t: float, W_t: np.ndarray) -> np.ndarray:
        """State X_t started from eta, given the Brownian value W_t."""

    @abc.abstractmethod
    def advance(self, X: np.ndarray, dt: float, dW: np.ndarray) -> np.ndarray:
        """State after a step of length dt with Brownian increment dW."""

    @abc.abstractmethod
    def drift(self, x: np.ndarray) -> np.ndarray:
        """M(x), shape ``m x d``."""

    @abc.abstractmethod
    def diffusion_diag(self, x: np.ndarray) -> np.ndarray:
        """Diagonal of Sigma(x), shape ``m x d`` (all diffusions here are diagonal)."""

    @abc.abstractmethod
    def driver(self, t: float, x: np.ndarray, y: np.ndarray, z: np.ndarray) -> DriverValue:
        """Batch driver f(t, x, y, z) with partial derivatives in y and z."""

    @abc.abstractmethod
    def terminal(self, x: np.ndarray) -> np.ndarray:
        """Batch terminal condition g(x)."""

    def driver_f(self, t: float, x, y, z):
        """f(t, x, y, z) for one point (returns a float) or a batch (returns an array)."""
        x_batch, single = as_batch(x)
        z_batch, _ = as_batch(z)
        y_batch = np.atleast_1d(np.asarray(y, dtype=np.float64))
        if x_batch.shape[1] != self.d or z_batch.shape != x_batch.shape:
            raise ContractViolation(f"Expected x and z of width {self.d}, got {x_batch.shape} / {z_batch.shape}")
        value = self.driver(t, x_batch, y_batch, z_batch).f
        return float(value[0]) if single else value

    def terminal_g(self, x):
        """g(x) for one point (returns a float) or a batch (returns an array)."""
        x_batch, single = as_batch(x)
        if x_batch.shape[1] != self.d:
            raise ContractViolation(f"Expected points of width {self.d}, got {x_batch.shape}")
        value = self.terminal(x_batch)
        return float(value[0]) if single else value

    def exact_solution(self, t: float, x: np.ndarray) -> np.ndarray:
        """Closed-form u(t, x) on a batch."""
        raise ContractViolation(f"Problem {self.kind.value} has no closed-form solution")

    def exact_z(self, t: float, x: np.ndarray) -> np.ndarray:
        """Closed-form Sigma^T grad u(t, x) on a batch."""
        raise ContractViolation(f"Problem {self.kind.value} has no closed-form solution")

    def reference_solution(
        self, x, t: float = 0.0, mc_config: Optional[McReferenceConfig] = None
    ) -> ReferenceEstimate:
        """
        Reference values of u(t, x).

        Closed-form problems ignore ``mc_config`` and report zero standard error.
        """
        x_batch, _ = as_batch(x)
        values = self.exact_solution(t, x_batch)
        return ReferenceEstimate(values=values, stderr=np.zeros_like(values))

    def __repr__(self) -> str:
        s = self.spec
        return f"{type(self).__name__}(d={s.d}, T={s.T}, domain=[{s.a}, {s.b}], mu={s.mu:.6g}, sigma={s.sigma:.6g})"

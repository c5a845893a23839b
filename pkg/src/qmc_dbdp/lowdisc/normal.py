"""
Normal Transforms

Standard normal CDF, density and inverse CDF, and the componentwise map from
uniform batches to normal batches.
"""

import math
from typing import Union

import numpy as np
from scipy import special

from qmc_dbdp.exceptions import DomainError
from qmc_dbdp.lowdisc.batches import NormalBatch, PointBatch

ArrayLike = Union[float, np.ndarray]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def normal_cdf(x: ArrayLike) -> ArrayLike:
    """Phi(x), erf-based."""
    return special.ndtr(x)


def normal_pdf(x: ArrayLike) -> ArrayLike:
    """phi(x)."""
    return _INV_SQRT_2PI * np.exp(-0.5 * np.square(x))


def inverse_normal_cdf(p: float) -> float:
    """
    Phi^{-1}(p).

    Args:
        p (float): Probability strictly inside (0, 1)

    Returns:
        float: x with Phi(x) = p

    Raises:
        DomainError: If p is not in (0, 1)
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"Inverse normal CDF needs 0 < p < 1, got {p!r}")
    return float(special.ndtri(p))


def to_normals(batch: PointBatch) -> NormalBatch:
    """Apply Phi^{-1} componentwise to a uniform batch."""
    values = batch.values
    if values.size and not (values.min() > 0.0 and values.max() < 1.0):
        raise DomainError("Uniform batch has entries outside (0, 1)")
    return NormalBatch(special.ndtri(values))

"""
Sample Batches

Immutable m x s containers for uniform and standard-normal samples.
"""

import numpy as np

from qmc_dbdp.exceptions import ContractViolation

# Uniforms are clamped into [UNIT_LOW, UNIT_HIGH] so that the inverse normal
# CDF never sees an exact 0 (the first Sobol' point) or 1.
UNIT_LOW = 2.0 ** -53
UNIT_HIGH = 1.0 - 2.0 ** -53


def clamp_unit(values: np.ndarray) -> np.ndarray:
    """Clamp uniforms into [2^-53, 1 - 2^-53]."""
    return np.clip(values, UNIT_LOW, UNIT_HIGH)


def _frozen_matrix(values, name: str) -> np.ndarray:
    array = np.array(values, dtype=np.float64, copy=True)
    if array.ndim != 2:
        raise ContractViolation(f"{name} must be a 2-d array, got shape {array.shape}")
    array.setflags(write=False)
    return array


class PointBatch:
    """
    Batch of m points in (0,1)^s.

    Every entry lies in [2^-53, 1 - 2^-53]; callers clamp with ``clamp_unit``
    before construction.
    """

    __slots__ = ("_values",)

    def __init__(self, values):
        array = _frozen_matrix(values, "PointBatch")
        if array.size and (array.min() < UNIT_LOW or array.max() > UNIT_HIGH):
            raise ContractViolation("PointBatch entries must lie strictly inside (0,1)")
        self._values = array

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def m(self) -> int:
        return self._values.shape[0]

    @property
    def s(self) -> int:
        return self._values.shape[1]

    def __repr__(self) -> str:
        return f"PointBatch(m={self.m}, s={self.s})"


class NormalBatch:
    """
    Batch of m standard-normal vectors of width s.

    For the DBDP problems s = 3d and the columns split into the initial-point
    block, the W_{t_i} block and the increment block (see
    ``qmc_dbdp.problems.base_problem.transform_normals``).
    """

    __slots__ = ("_values",)

    def __init__(self, values):
        array = _frozen_matrix(values, "NormalBatch")
        if not np.all(np.isfinite(array)):
            raise ContractViolation("NormalBatch entries must be finite")
        self._values = array

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def m(self) -> int:
        return self._values.shape[0]

    @property
    def s(self) -> int:
        return self._values.shape[1]

    def __repr__(self) -> str:
        return f"NormalBatch(m={self.m}, s={self.s})"

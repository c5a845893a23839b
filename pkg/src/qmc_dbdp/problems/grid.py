"""
Time Grid

Discretization 0 = t_0 < t_1 < ... < t_N = T of the horizon.
"""

from typing import Sequence

import numpy as np

from qmc_dbdp.exceptions import ContractViolation


class TimeGrid:
    """
    Strictly increasing time nodes starting at 0.

    Args:
        nodes (Sequence[float]): t_0, ..., t_N with t_0 = 0
    """

    __slots__ = ("_nodes",)

    def __init__(self, nodes: Sequence[float]):
        array = np.array(nodes, dtype=np.float64, copy=True)
        if array.ndim != 1 or array.shape[0] < 2:
            raise ContractViolation(f"A time grid needs at least two nodes, got {array.tolist()}")
        if array[0] != 0.0:
            raise ContractViolation(f"Time grid must start at 0, got {array[0]}")
        if np.any(np.diff(array) <= 0.0):
            raise ContractViolation("Time grid nodes must be strictly increasing")
        array.setflags(write=False)
        self._nodes = array

    @classmethod
    def uniform(cls, T: float, N: int) -> "TimeGrid":
        """N equal steps on [0, T]; the last node is exactly T."""
        if T <= 0 or N < 1:
            raise ContractViolation(f"Need T > 0 and N >= 1, got T={T}, N={N}")
        nodes = np.arange(N + 1, dtype=np.float64) * (T / N)
        nodes[-1] = T
        return cls(nodes)

    @property
    def nodes(self) -> np.ndarray:
        return self._nodes

    @property
    def N(self) -> int:
        return self._nodes.shape[0] - 1

    @property
    def T(self) -> float:
        return float(self._nodes[-1])

    @property
    def mesh(self) -> float:
        """|pi| = max dt_i."""
        return float(np.max(np.diff(self._nodes)))

    def t(self, i: int) -> float:
        return float(self._nodes[i])

    def dt(self, i: int) -> float:
        """t_{i+1} - t_i."""
        if not 0 <= i < self.N:
            raise ContractViolation(f"Step index {i} outside 0..{self.N - 1}")
        return float(self._nodes[i + 1] - self._nodes[i])

    def to_list(self) -> list:
        return [float(t) for t in self._nodes]

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeGrid):
            return NotImplemented
        return np.array_equal(self._nodes, other._nodes)

    def __repr__(self) -> str:
        return f"TimeGrid(N={self.N}, T={self.T})"

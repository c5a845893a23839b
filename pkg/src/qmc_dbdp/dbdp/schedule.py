"""
Training Settings

Adam schedule and network options of a DBDP run.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

from qmc_dbdp.exceptions import ContractViolation
from qmc_dbdp.net.optim import DEFAULT_WEIGHT_DECAY


@dataclass(frozen=True)
class TrainingSchedule:
    """
    Two-tier Adam schedule.

    The first trained step (i = N-1, next to the terminal condition) uses the
    ``*_first`` values, every other step the ``*_rest`` values.
    """

    iterations_first: int = 50000
    iterations_rest: int = 5000
    lr_first: float = 0.01
    lr_rest: float = 0.001
    halve_every_first: int = 5000
    halve_every_rest: int = 500
    batch_size: int = 1 << 12

    def __post_init__(self):
        if self.iterations_first < 0 or self.iterations_rest < 0:
            raise ContractViolation("Iteration counts must be non-negative")
        if self.lr_first <= 0 or self.lr_rest <= 0:
            raise ContractViolation("Learning rates must be positive")
        if self.halve_every_first < 1 or self.halve_every_rest < 1 or self.batch_size < 1:
            raise ContractViolation("Halving periods and batch size must be positive")

    def for_step(self, i: int, N: int) -> Tuple[int, float, int]:
        """(iterations, base learning rate, halving period) of step i."""
        if i == N - 1:
            return self.iterations_first, self.lr_first, self.halve_every_first
        return self.iterations_rest, self.lr_rest, self.halve_every_rest


@dataclass(frozen=True)
class NetworkOptions:
    """
    Architecture and optimizer options shared by every step.

    Args:
        width (int): Hidden width
        depth (int): Number of affine maps
        batch_norm (bool): Normalize hidden layers
        weight_decay (float): Decoupled weight decay
        param_bound (Optional[float]): Clip parameters into [-R, R] after every update
    """

    width: int
    depth: int = 4
    batch_norm: bool = False
    weight_decay: float = DEFAULT_WEIGHT_DECAY
    param_bound: Optional[float] = None

    @classmethod
    def for_dimension(cls, d: int, **kwargs) -> "NetworkOptions":
        """Default width d + 20."""
        return cls(width=d + 20, **kwargs)

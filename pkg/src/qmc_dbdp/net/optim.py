"""
Adam Optimizer

Adam with decoupled weight decay and a step-halving learning-rate schedule.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from qmc_dbdp.exceptions import ContractViolation, TrainingAbortedError

logger = logging.getLogger(__name__)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8
DEFAULT_WEIGHT_DECAY = 0.01


@dataclass
class AdamState:
    """
    Optimizer state for one flat parameter vector.

    ``t`` counts completed updates. The learning rate used by the next update
    is ``base_lr * 2 ** -(t // halving_period)``.
    """

    size: int
    base_lr: float
    halving_period: int
    weight_decay: float = DEFAULT_WEIGHT_DECAY
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPSILON
    t: int = 0
    m: np.ndarray = field(default=None, repr=False)
    v: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.base_lr <= 0 or self.halving_period < 1:
            raise ContractViolation(
                f"Learning rate and halving period must be positive, got {self.base_lr} / {self.halving_period}"
            )
        if self.m is None:
            self.m = np.zeros(self.size)
        if self.v is None:
            self.v = np.zeros(self.size)

    def learning_rate(self) -> float:
        return self.base_lr * 2.0 ** -(self.t // self.halving_period)


def adam_step(theta: np.ndarray, grad: np.ndarray, state: AdamState) -> np.ndarray:
    """
    One AdamW update.

    The weight decay shrinks the parameters directly (theta *= 1 - lr * wd)
    and never enters the moment estimates.

    Args:
        theta (np.ndarray): Current flat parameters
        grad (np.ndarray): Gradient of the loss at ``theta``
        state (AdamState): Moments and step counter, updated in place

    Returns:
        np.ndarray: Updated parameters (a new array)

    Raises:
        TrainingAbortedError: If the gradient has non-finite entries
    """
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != (state.size,) or np.shape(theta) != (state.size,):
        raise ContractViolation(f"Expected vectors of length {state.size}, got {np.shape(theta)} / {grad.shape}")
    if not np.all(np.isfinite(grad)):
        raise TrainingAbortedError("Non-finite gradient", iteration=state.t)

    lr = state.learning_rate()
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = state.m / (1.0 - state.beta1 ** state.t)
    v_hat = state.v / (1.0 - state.beta2 ** state.t)

    updated = np.asarray(theta, dtype=np.float64) * (1.0 - lr * state.weight_decay)
    return updated - lr * m_hat / (np.sqrt(v_hat) + state.eps)

"""
Batch Normalization

Per-unit batch normalization of hidden pre-activations, with learnable scale
and shift and exponentially averaged running statistics for evaluation mode.
"""

import enum
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from qmc_dbdp.exceptions import ContractViolation

logger = logging.getLogger(__name__)

BN_EPSILON = 1e-5
BN_MOMENTUM = 0.1


class BatchNormMode(str, enum.Enum):
    TRAIN = "train"
    EVAL = "eval"


@dataclass
class BatchNormCache:
    """Values of one normalized layer kept for the backward pass."""

    x_hat: np.ndarray
    inv_std: np.ndarray
    mode: BatchNormMode


class BatchNormState:
    """
    Normalization state of every hidden layer of one network.

    ``gamma``, ``beta``, ``running_mean`` and ``running_var`` hold one array per
    hidden layer. Running statistics follow the usual convention: the running
    variance is updated with the unbiased batch variance, normalization in
    training mode uses the biased one.

    Args:
        hidden_sizes (Sequence[int]): Width of every normalized layer
        eps (float): Variance floor inside the square root
        momentum (float): Weight of the current batch in the running averages
    """

    def __init__(self, hidden_sizes: Sequence[int], eps: float = BN_EPSILON, momentum: float = BN_MOMENTUM):
        if not 0.0 < momentum <= 1.0:
            raise ContractViolation(f"Batch-norm momentum must lie in (0, 1], got {momentum}")
        self.hidden_sizes = tuple(int(n) for n in hidden_sizes)
        self.eps = eps
        self.momentum = momentum
        self.mode = BatchNormMode.TRAIN
        self.gamma: List[np.ndarray] = [np.ones(n) for n in self.hidden_sizes]
        self.beta: List[np.ndarray] = [np.zeros(n) for n in self.hidden_sizes]
        self.running_mean: List[np.ndarray] = [np.zeros(n) for n in self.hidden_sizes]
        self.running_var: List[np.ndarray] = [np.ones(n) for n in self.hidden_sizes]
        # bumped whenever gamma/beta are replaced, so stale caches are detected
        self.generation = 0

    @property
    def unit_count(self) -> int:
        return sum(self.hidden_sizes)

    @property
    def affine_count(self) -> int:
        """Number of trainable entries (gamma and beta)."""
        return 2 * self.unit_count

    def train(self):
        self.mode = BatchNormMode.TRAIN

    def eval(self):
        self.mode = BatchNormMode.EVAL

    def affine_vector(self) -> np.ndarray:
        """All gamma entries followed by all beta entries."""
        return np.concatenate(self.gamma + self.beta) if self.hidden_sizes else np.zeros(0)

    def set_affine_vector(self, values: np.ndarray):
        """Replace gamma and beta from the layout of ``affine_vector``."""
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (self.affine_count,):
            raise ContractViolation(f"Expected {self.affine_count} batch-norm values, got shape {values.shape}")
        gammas, betas = values[: self.unit_count], values[self.unit_count:]
        self.gamma = _split(gammas, self.hidden_sizes)
        self.beta = _split(betas, self.hidden_sizes)
        self.generation += 1

    def running_vector(self) -> np.ndarray:
        """All running means followed by all running variances."""
        return np.concatenate(self.running_mean + self.running_var) if self.hidden_sizes else np.zeros(0)

    def set_running_vector(self, values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (2 * self.unit_count,):
            raise ContractViolation(f"Expected {2 * self.unit_count} running statistics, got shape {values.shape}")
        variances = values[self.unit_count:]
        if np.any(variances < 0.0):
            raise ContractViolation("Running variances must be non-negative")
        self.running_mean = _split(values[: self.unit_count], self.hidden_sizes)
        self.running_var = _split(variances, self.hidden_sizes)

    def copy(self) -> "BatchNormState":
        other = BatchNormState(self.hidden_sizes, self.eps, self.momentum)
        other.mode = self.mode
        other.gamma = [g.copy() for g in self.gamma]
        other.beta = [b.copy() for b in self.beta]
        other.running_mean = [m.copy() for m in self.running_mean]
        other.running_var = [v.copy() for v in self.running_var]
        return other

    def __repr__(self) -> str:
        return f"BatchNormState(hidden_sizes={self.hidden_sizes}, mode={self.mode.value})"


def _split(values: np.ndarray, sizes: Tuple[int, ...]) -> List[np.ndarray]:
    bounds = np.cumsum((0,) + sizes)
    return [values[lo:hi].copy() for lo, hi in zip(bounds[:-1], bounds[1:])]


def bn_forward(state: BatchNormState, layer: int, a: np.ndarray) -> Tuple[np.ndarray, BatchNormCache]:
    """
    Normalize the pre-activations ``a`` of hidden layer ``layer``.

    In training mode the batch statistics are used and the running statistics
    are updated; in evaluation mode the running statistics are used.
    """
    gamma, beta = state.gamma[layer], state.beta[layer]
    if state.mode is BatchNormMode.TRAIN:
        n = a.shape[0]
        if n < 2:
            raise ContractViolation("Batch normalization in training mode needs at least 2 samples")
        mean = a.mean(axis=0)
        var = a.var(axis=0)
        state.running_mean[layer] = (1.0 - state.momentum) * state.running_mean[layer] + state.momentum * mean
        state.running_var[layer] = (1.0 - state.momentum) * state.running_var[layer] + state.momentum * var * (
            n / (n - 1)
        )
    else:
        mean = state.running_mean[layer]
        var = state.running_var[layer]

    inv_std = 1.0 / np.sqrt(var + state.eps)
    x_hat = (a - mean) * inv_std
    return gamma * x_hat + beta, BatchNormCache(x_hat=x_hat, inv_std=inv_std, mode=state.mode)


def bn_backward(
    state: BatchNormState, layer: int, cache: BatchNormCache, d_out: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Backward pass of ``bn_forward``.

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray]: gradient with respect to the
        pre-activations, to gamma and to beta
    """
    d_gamma = np.sum(d_out * cache.x_hat, axis=0)
    d_beta = np.sum(d_out, axis=0)
    d_xhat = d_out * state.gamma[layer]
    if cache.mode is BatchNormMode.EVAL:
        return d_xhat * cache.inv_std, d_gamma, d_beta

    n = d_out.shape[0]
    d_a = (cache.inv_std / n) * (
        n * d_xhat - np.sum(d_xhat, axis=0) - cache.x_hat * np.sum(d_xhat * cache.x_hat, axis=0)
    )
    return d_a, d_gamma, d_beta

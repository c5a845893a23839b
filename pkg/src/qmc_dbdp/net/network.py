"""
Feedforward Networks

tanh multilayer perceptrons with hand-written forward and backward passes.

A network with structure S = (l_1, ..., l_{k+1}) computes
A_k o rho o A_{k-1} o ... o rho o A_1(x) with affine maps A_i(x) = Q_i x + b_i
and rho = tanh applied componentwise. With batch normalization enabled, every
hidden layer is normalized after its affine map and before tanh.

Flat parameter order: for layer 1..k, the weight matrix Q_i (l_{i+1} x l_i)
row-major, followed by the bias b_i. Gradients returned by ``backward`` use the
same order, followed by the batch-norm gammas and then betas when batch
normalization is active.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from qmc_dbdp.exceptions import ContractViolation
from qmc_dbdp.net.batchnorm import BatchNormCache, BatchNormState, bn_backward, bn_forward
from qmc_dbdp.utils.seeding import philox_generator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NetworkSpec:
    """
    Architecture descriptor.

    Args:
        layer_sizes (Tuple[int, ...]): (l_1, ..., l_{k+1}), input width first
    """

    layer_sizes: Tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.layer_sizes)
        if len(sizes) < 2:
            raise ContractViolation(f"A network needs at least one affine layer, got sizes {sizes}")
        if any(n < 1 for n in sizes):
            raise ContractViolation(f"Layer sizes must be positive, got {sizes}")
        object.__setattr__(self, "layer_sizes", sizes)

    @classmethod
    def build(cls, input_dim: int, output_dim: int, width: int, depth: int) -> "NetworkSpec":
        """Spec with ``depth`` affine maps and ``depth - 1`` hidden layers of equal width."""
        if depth < 1:
            raise ContractViolation(f"Network depth must be at least 1, got {depth}")
        return cls((input_dim,) + (width,) * (depth - 1) + (output_dim,))

    @property
    def depth(self) -> int:
        """D(S), the number of affine maps."""
        return len(self.layer_sizes) - 1

    @property
    def width(self) -> int:
        """||S||_inf, the widest layer."""
        return max(self.layer_sizes)

    @property
    def param_count(self) -> int:
        """|S|, total number of weights and biases."""
        return sum(n_in * n_out + n_out for n_in, n_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]))

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_dim(self) -> int:
        return self.layer_sizes[-1]

    @property
    def hidden_sizes(self) -> Tuple[int, ...]:
        return self.layer_sizes[1:-1]

    def layer_slices(self) -> List[Tuple[slice, slice]]:
        """(weight slice, bias slice) into the flat vector, per layer."""
        slices = []
        offset = 0
        for n_in, n_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            w = slice(offset, offset + n_in * n_out)
            offset += n_in * n_out
            b = slice(offset, offset + n_out)
            offset += n_out
            slices.append((w, b))
        return slices


class Parameters:
    """
    Immutable flat parameter vector of one network.

    Args:
        spec (NetworkSpec): Architecture the vector belongs to
        flat (np.ndarray): ``spec.param_count`` values in flat order
    """

    __slots__ = ("spec", "_flat")

    def __init__(self, spec: NetworkSpec, flat):
        array = np.array(flat, dtype=np.float64, copy=True).reshape(-1)
        if array.shape[0] != spec.param_count:
            raise ContractViolation(f"Expected {spec.param_count} parameters for {spec.layer_sizes}, got {array.shape[0]}")
        array.setflags(write=False)
        self.spec = spec
        self._flat = array

    @classmethod
    def zeros(cls, spec: NetworkSpec) -> "Parameters":
        return cls(spec, np.zeros(spec.param_count))

    @classmethod
    def from_layers(cls, spec: NetworkSpec, layers: Sequence[Tuple[np.ndarray, np.ndarray]]) -> "Parameters":
        """Build from per-layer ``(Q_i, b_i)`` pairs."""
        if len(layers) != spec.depth:
            raise ContractViolation(f"Expected {spec.depth} layers, got {len(layers)}")
        flat = np.zeros(spec.param_count)
        for (w_slice, b_slice), (n_in, n_out), (weight, bias) in zip(
            spec.layer_slices(), zip(spec.layer_sizes[:-1], spec.layer_sizes[1:]), layers
        ):
            weight = np.asarray(weight, dtype=np.float64)
            bias = np.asarray(bias, dtype=np.float64).reshape(-1)
            if weight.shape != (n_out, n_in) or bias.shape != (n_out,):
                raise ContractViolation(
                    f"Layer shapes {weight.shape}/{bias.shape} do not match ({n_out}, {n_in})/({n_out},)"
                )
            flat[w_slice] = weight.reshape(-1)
            flat[b_slice] = bias
        return cls(spec, flat)

    @property
    def flat(self) -> np.ndarray:
        return self._flat

    def weight(self, layer: int) -> np.ndarray:
        w_slice, _ = self.spec.layer_slices()[layer]
        return self._flat[w_slice].reshape(self.spec.layer_sizes[layer + 1], self.spec.layer_sizes[layer])

    def bias(self, layer: int) -> np.ndarray:
        _, b_slice = self.spec.layer_slices()[layer]
        return self._flat[b_slice]

    def layers(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        return [(self.weight(i), self.bias(i)) for i in range(self.spec.depth)]

    def with_flat(self, flat) -> "Parameters":
        return Parameters(self.spec, flat)

    def max_abs(self) -> float:
        """||theta||_inf."""
        return float(np.max(np.abs(self._flat))) if self._flat.size else 0.0

    def __eq__(self, other) -> bool:
        if not isinstance(other, Parameters):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self._flat, other._flat)

    def __repr__(self) -> str:
        return f"Parameters(layer_sizes={self.spec.layer_sizes}, max_abs={self.max_abs():.4g})"


def xavier_init(spec: NetworkSpec, seed: int) -> Parameters:
    """
    Xavier (Glorot) uniform initialization.

    Weights of layer i are drawn uniformly on [-a, a] with
    a = sqrt(6 / (l_i + l_{i+1})); biases are zero.

    Args:
        spec (NetworkSpec): Architecture
        seed (int): 64-bit seed of the initialization stream
    """
    rng = philox_generator(seed)
    layers = []
    for n_in, n_out in zip(spec.layer_sizes[:-1], spec.layer_sizes[1:]):
        bound = math.sqrt(6.0 / (n_in + n_out))
        layers.append((rng.uniform(-bound, bound, size=(n_out, n_in)), np.zeros(n_out)))
    return Parameters.from_layers(spec, layers)


def project_params(params: Parameters, bound: float) -> Parameters:
    """Clip every parameter into [-bound, bound]."""
    if bound <= 0:
        raise ContractViolation(f"Parameter bound must be positive, got {bound}")
    return params.with_flat(np.clip(params.flat, -bound, bound))


@dataclass
class ForwardCache:
    """Activations kept by ``forward`` for ``backward``."""

    spec: NetworkSpec
    params: Parameters
    activations: List[np.ndarray]
    bn_caches: List[BatchNormCache] = field(default_factory=list)
    bn_generation: Optional[int] = None


def forward(
    spec: NetworkSpec, params: Parameters, bn: Optional[BatchNormState], X: np.ndarray
) -> Tuple[np.ndarray, ForwardCache]:
    """
    Evaluate the network on a batch.

    Args:
        spec (NetworkSpec): Architecture
        params (Parameters): Weights and biases
        bn (Optional[BatchNormState]): Normalization state, None to disable
        X (np.ndarray): ``n x l_1`` inputs

    Returns:
        Tuple[np.ndarray, ForwardCache]: ``n x l_{k+1}`` outputs and the cache

    Raises:
        ContractViolation: On shape mismatches
    """
    if params.spec != spec:
        raise ContractViolation(f"Parameters for {params.spec.layer_sizes} used with spec {spec.layer_sizes}")
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != spec.input_dim:
        raise ContractViolation(f"Expected inputs of shape (n, {spec.input_dim}), got {X.shape}")
    if bn is not None and bn.hidden_sizes != spec.hidden_sizes:
        raise ContractViolation(f"Batch-norm state for {bn.hidden_sizes} used with hidden sizes {spec.hidden_sizes}")

    activations = [X]
    bn_caches: List[BatchNormCache] = []
    h = X
    for layer, (weight, bias) in enumerate(params.layers()):
        a = h @ weight.T + bias
        if layer == spec.depth - 1:
            h = a
            break
        if bn is not None:
            a, bn_cache = bn_forward(bn, layer, a)
            bn_caches.append(bn_cache)
        h = np.tanh(a)
        activations.append(h)

    cache = ForwardCache(
        spec=spec,
        params=params,
        activations=activations,
        bn_caches=bn_caches,
        bn_generation=bn.generation if bn is not None else None,
    )
    return h, cache


def backward(
    spec: NetworkSpec,
    params: Parameters,
    cache: ForwardCache,
    dL_dout: np.ndarray,
    bn: Optional[BatchNormState] = None,
) -> np.ndarray:
    """
    Gradient of a scalar loss with respect to all trainable values.

    Args:
        spec (NetworkSpec): Architecture
        params (Parameters): The parameters ``forward`` was called with
        cache (ForwardCache): Cache returned by that ``forward`` call
        dL_dout (np.ndarray): ``n x l_{k+1}`` gradient of the loss with respect to the outputs
        bn (Optional[BatchNormState]): The normalization state ``forward`` used

    Returns:
        np.ndarray: Flat gradient, ``spec.param_count`` entries followed by the
        gamma and beta gradients when ``bn`` is given

    Raises:
        ContractViolation: If the cache does not belong to these parameters
    """
    if cache.params is not params or cache.spec != spec:
        raise ContractViolation("Stale forward cache: parameters changed since the forward pass")
    if (bn is None) != (cache.bn_generation is None) or (bn is not None and bn.generation != cache.bn_generation):
        raise ContractViolation("Stale forward cache: batch-norm state changed since the forward pass")

    n = cache.activations[0].shape[0]
    delta = np.asarray(dL_dout, dtype=np.float64)
    if delta.shape != (n, spec.output_dim):
        raise ContractViolation(f"Expected output gradient of shape ({n}, {spec.output_dim}), got {delta.shape}")

    grad = np.zeros(spec.param_count)
    hidden = len(spec.hidden_sizes)
    d_gammas: List[np.ndarray] = [np.zeros(0)] * hidden
    d_betas: List[np.ndarray] = [np.zeros(0)] * hidden
    slices = spec.layer_slices()

    for layer in range(spec.depth - 1, -1, -1):
        h_prev = cache.activations[layer]
        w_slice, b_slice = slices[layer]
        grad[w_slice] = (delta.T @ h_prev).reshape(-1)
        grad[b_slice] = delta.sum(axis=0)
        if layer == 0:
            break
        # back through tanh of the previous hidden layer
        delta = (delta @ params.weight(layer)) * (1.0 - h_prev * h_prev)
        if bn is not None:
            delta, d_gammas[layer - 1], d_betas[layer - 1] = bn_backward(bn, layer - 1, cache.bn_caches[layer - 1], delta)

    if bn is None:
        return grad
    return np.concatenate([grad] + d_gammas + d_betas)


class Network:
    """
    A network together with its parameters and optional batch normalization.

    The trainable vector is ``params.flat`` followed by the batch-norm
    ``affine_vector`` (gammas, then betas).

    Args:
        spec (NetworkSpec): Architecture
        params (Parameters): Initial parameters
        batch_norm (bool): Enable batch normalization on the hidden layers
    """

    def __init__(self, spec: NetworkSpec, params: Parameters, batch_norm: bool = False):
        self.spec = spec
        self.params = params
        self.bn: Optional[BatchNormState] = BatchNormState(spec.hidden_sizes) if batch_norm else None

    @property
    def trainable_count(self) -> int:
        return self.spec.param_count + (self.bn.affine_count if self.bn is not None else 0)

    def trainable_vector(self) -> np.ndarray:
        if self.bn is None:
            return self.params.flat.copy()
        return np.concatenate([self.params.flat, self.bn.affine_vector()])

    def set_trainable_vector(self, values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (self.trainable_count,):
            raise ContractViolation(f"Expected {self.trainable_count} trainable values, got shape {values.shape}")
        self.params = self.params.with_flat(values[: self.spec.param_count])
        if self.bn is not None:
            self.bn.set_affine_vector(values[self.spec.param_count:])

    def train(self):
        if self.bn is not None:
            self.bn.train()

    def eval(self):
        if self.bn is not None:
            self.bn.eval()

    def forward(self, X: np.ndarray) -> Tuple[np.ndarray, ForwardCache]:
        return forward(self.spec, self.params, self.bn, X)

    def backward(self, cache: ForwardCache, dL_dout: np.ndarray) -> np.ndarray:
        return backward(self.spec, self.params, cache, dL_dout, self.bn)

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Outputs in evaluation mode; running statistics are left untouched."""
        if self.bn is None:
            return forward(self.spec, self.params, None, X)[0]
        frozen = self.bn.copy()
        frozen.eval()
        return forward(self.spec, self.params, frozen, X)[0]

    def copy(self) -> "Network":
        other = Network(self.spec, self.params)
        other.bn = self.bn.copy() if self.bn is not None else None
        return other

    def __repr__(self) -> str:
        return f"Network(layer_sizes={self.spec.layer_sizes}, batch_norm={self.bn is not None})"


@dataclass(frozen=True)
class LipschitzConstants:
    """
    Constants of the parameter-Lipschitz and sup bounds of scalar networks.

    ``C_SR`` bounds |U(x; theta_1) - U(x; theta_2)| / (max(||x||_inf, 1) ||theta_1 - theta_2||_inf)
    and ``B_SR`` bounds |U(x; theta)| on the class ||theta||_inf <= R.
    """

    C_SR: float
    B_SR: float


def lipschitz_constants(spec: NetworkSpec, R: float) -> LipschitzConstants:
    """
    C_SR = |S| R^(D-1) ||S||^(D-1) and B_SR = 2 R ||S||.

    Args:
        spec (NetworkSpec): Architecture
        R (float): Parameter bound, positive
    """
    if R <= 0:
        raise ContractViolation(f"Parameter bound R must be positive, got {R}")
    exponent = spec.depth - 1
    c_sr = spec.param_count * R ** exponent * spec.width ** exponent
    return LipschitzConstants(C_SR=float(c_sr), B_SR=float(2.0 * R * spec.width))

"""
Batch Samplers

Monte Carlo and randomized quasi-Monte Carlo sources of training and
quadrature batches, and the factory that creates them by name.

Both samplers produce uniforms first and map them through Phi^{-1}, so the
code downstream of ``normals`` is identical for MC and RQMC. Each batch is
identified by a stream tuple (for training: tag, step, iteration); the
randomness behind a batch is derived statelessly from the master seed and that
tuple, so batches may be produced in any order or concurrently.
"""

import abc
import logging
from typing import Dict, Tuple, Type

import numpy as np

from qmc_dbdp.exceptions import ConfigurationError, ContractViolation
from qmc_dbdp.lowdisc.batches import NormalBatch, PointBatch, clamp_unit
from qmc_dbdp.lowdisc.normal import to_normals
from qmc_dbdp.lowdisc.scramble import ScrambleKey, ScrambleMode
from qmc_dbdp.lowdisc.sobol import SobolGenerator, sobol_points
from qmc_dbdp.utils.seeding import derive_seed, philox_generator

logger = logging.getLogger(__name__)


def mc_points(rng_seed: int, m: int, s: int) -> PointBatch:
    """
    Pseudo-random uniforms from a counter-based Philox stream.

    Args:
        rng_seed (int): 64-bit seed
        m (int): Number of points
        s (int): Point dimension

    Returns:
        PointBatch: ``m x s`` clamped uniforms, deterministic given the seed
    """
    if m < 1 or s < 1:
        raise ContractViolation(f"Batch shape must be positive, got ({m}, {s})")
    return PointBatch(clamp_unit(philox_generator(rng_seed).random((m, s))))


class BatchSampler(abc.ABC):
    """
    Base class for batch samplers.

    Args:
        master_seed (int): Seed every batch is derived from
    """

    kind = ""

    def __init__(self, master_seed: int):
        self.master_seed = master_seed

    @abc.abstractmethod
    def uniforms(self, m: int, s: int, stream: Tuple[int, ...]) -> PointBatch:
        """
        Produce the uniform batch identified by ``stream``.

        Args:
            m (int): Batch size
            s (int): Point dimension
            stream (Tuple[int, ...]): Stream identifier
        """

    def normals(self, m: int, s: int, stream: Tuple[int, ...]) -> NormalBatch:
        """Standard-normal batch identified by ``stream``."""
        return to_normals(self.uniforms(m, s, stream))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(master_seed={self.master_seed})"


class MonteCarloSampler(BatchSampler):
    """Independent Philox substream per batch."""

    kind = "mc"

    def uniforms(self, m: int, s: int, stream: Tuple[int, ...]) -> PointBatch:
        return mc_points(derive_seed(self.master_seed, *stream), m, s)


class RQMCSampler(BatchSampler):
    """
    Fresh scramble of the first m Sobol' points per batch.

    Args:
        master_seed (int): Seed every scramble key is derived from
        scramble (ScrambleMode): Randomization applied to the Sobol' points
    """

    kind = "rqmc"

    def __init__(self, master_seed: int, scramble: ScrambleMode = ScrambleMode.OWEN_NESTED):
        super().__init__(master_seed)
        self.scramble = ScrambleMode(scramble)
        if self.scramble is ScrambleMode.NONE:
            logger.warning("RQMC sampler without scrambling: every batch is the same deterministic point set")

    def uniforms(self, m: int, s: int, stream: Tuple[int, ...]) -> PointBatch:
        if m & (m - 1):
            logger.debug("RQMC batch size %d is not a power of two; net balance properties are lost", m)
        # every batch is the first m points under a fresh key
        gen = SobolGenerator(s)
        key = ScrambleKey(derive_seed(self.master_seed, *stream), self.scramble)
        return sobol_points(gen, key, m)

    def __repr__(self) -> str:
        return f"RQMCSampler(master_seed={self.master_seed}, scramble={self.scramble.value})"


class SamplerFactory:
    """
    Factory for creating samplers by kind.
    """

    def __init__(self):
        self.sampler_classes: Dict[str, Type[BatchSampler]] = {
            MonteCarloSampler.kind: MonteCarloSampler,
            RQMCSampler.kind: RQMCSampler,
        }

    def create_sampler(
        self,
        kind: str,
        master_seed: int,
        scramble: ScrambleMode = ScrambleMode.OWEN_NESTED,
    ) -> BatchSampler:
        """
        Create a sampler.

        Args:
            kind (str): ``mc`` or ``rqmc``
            master_seed (int): Seed every batch is derived from
            scramble (ScrambleMode): Randomization for RQMC

        Raises:
            ConfigurationError: If the kind is unknown
        """
        sampler_class = self.sampler_classes.get(kind)
        if sampler_class is None:
            raise ConfigurationError(f"Unknown sampler kind: {kind} (supported: {', '.join(self.get_supported_kinds())})")
        if sampler_class is RQMCSampler:
            return RQMCSampler(master_seed, scramble)
        return sampler_class(master_seed)

    def get_supported_kinds(self) -> list:
        return list(self.sampler_classes.keys())


def uniform_box(batch: PointBatch, a: float, b: float) -> np.ndarray:
    """Affine map of a uniform batch onto [a, b]^s."""
    return a + (b - a) * batch.values

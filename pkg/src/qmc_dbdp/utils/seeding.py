"""
Seed Derivation

Stateless derivation of child seeds and random generators from a master seed.

Every stream in the project (MC batches, scramble keys, network initialization,
evaluation points, reference estimators) is identified by a tuple of
non-negative integers and derived from the master seed with
``numpy.random.SeedSequence``. The same tuple always yields the same stream,
regardless of the order or the thread in which streams are requested.
"""

from typing import Tuple

import numpy as np

# Stream tags keep unrelated consumers of the same (step, iteration) apart.
STREAM_INIT = 1
STREAM_BATCH = 2
STREAM_EVAL = 3
STREAM_REFERENCE = 4
STREAM_PROBE = 5
STREAM_RUN = 6

_UINT64_MASK = (1 << 64) - 1


def _seed_sequence(master_seed: int, path: Tuple[int, ...]) -> np.random.SeedSequence:
    if master_seed < 0:
        raise ValueError(f"Master seed must be non-negative, got {master_seed}")
    if any(p < 0 for p in path):
        raise ValueError(f"Stream path entries must be non-negative, got {path}")
    return np.random.SeedSequence(int(master_seed) & _UINT64_MASK, spawn_key=tuple(int(p) for p in path))


def derive_seed(master_seed: int, *path: int) -> int:
    """
    Derive a 64-bit child seed.

    Args:
        master_seed (int): Master seed
        *path (int): Stream identifier, e.g. ``(STREAM_BATCH, step, iteration)``

    Returns:
        int: Unsigned 64-bit seed
    """
    state = _seed_sequence(master_seed, path).generate_state(1, dtype=np.uint64)
    return int(state[0])


def philox_generator(seed: int) -> np.random.Generator:
    """Counter-based generator for a single (already derived) seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed) & _UINT64_MASK)))


def derive_generator(master_seed: int, *path: int) -> np.random.Generator:
    """Counter-based generator for the stream ``path`` under ``master_seed``."""
    return np.random.Generator(np.random.Philox(_seed_sequence(master_seed, path)))

"""
Scrambling

Randomizations of base-2 digital points: random digital shift and nested
uniform (Owen) scrambling.

Owen scrambling is realized without storing permutation trees: the flip of
digit k of coordinate j is decided by a keyed hash of (j, the k leading digits
of the unscrambled coordinate, key). Because the decision for digit k depends
on the original digits above it, this is exactly a nested scramble, and every
scrambled point is marginally uniform. The 32 scrambled digits are followed by
21 hashed digits so that the output uses the full float64 mantissa.
"""

import enum
import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_TAIL_SALT = 0xD1B54A32D192ED03
_TAIL_BITS = 21


class ScrambleMode(str, enum.Enum):
    NONE = "none"
    DIGITAL_SHIFT = "digital_shift"
    OWEN_NESTED = "owen_nested"


@dataclass(frozen=True)
class ScrambleKey:
    """
    Scrambling seed and mode.

    Identical key, mode and index always produce the bit-identical point.
    """

    seed: int
    mode: ScrambleMode = ScrambleMode.OWEN_NESTED

    def __post_init__(self):
        if not 0 <= self.seed <= _MASK64:
            raise ValueError(f"Scramble seed must be an unsigned 64-bit integer, got {self.seed}")
        object.__setattr__(self, "mode", ScrambleMode(self.mode))


def _mix64_scalar(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer on uint64 arrays (wrapping arithmetic)."""
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def dimension_keys(seed: int, dimension: int) -> np.ndarray:
    """Per-coordinate 64-bit keys derived from a scramble seed."""
    keys = [_mix64_scalar(seed ^ _mix64_scalar((j + 1) * _GOLDEN)) for j in range(dimension)]
    return np.array(keys, dtype=np.uint64)


def digital_shift(points: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """
    XOR every coordinate with a fixed 32-bit shift.

    Args:
        points (np.ndarray): ``(m, s)`` uint64 integer points below 2^32
        shifts (np.ndarray): ``(s,)`` uint64 shifts below 2^32

    Returns:
        np.ndarray: Shifted integer points
    """
    return points ^ np.asarray(shifts, dtype=np.uint64)[None, :]


def owen_scramble(points: np.ndarray, keys: np.ndarray, bits: int = 32) -> np.ndarray:
    """
    Nested uniform scramble of ``bits``-digit integer points.

    Args:
        points (np.ndarray): ``(m, s)`` uint64 integer points below 2^bits
        keys (np.ndarray): ``(s,)`` per-coordinate keys

    Returns:
        np.ndarray: ``(m, s)`` uint64 integers below 2^(bits + 21)
    """
    keys = np.asarray(keys, dtype=np.uint64)[None, :]
    golden = np.uint64(_GOLDEN)
    flips = np.zeros_like(points)
    for k in range(bits):
        # leading-one marker keeps prefixes of different lengths apart
        node = (points >> np.uint64(bits - k)) | np.uint64(1 << k)
        decision = _mix64(node * golden ^ keys) >> np.uint64(63)
        flips |= decision << np.uint64(bits - 1 - k)

    tail_node = points | np.uint64(1 << bits)
    tail = _mix64(tail_node * golden ^ keys ^ np.uint64(_TAIL_SALT)) >> np.uint64(64 - _TAIL_BITS)
    return ((points ^ flips) << np.uint64(_TAIL_BITS)) | tail


def scramble_points(points: np.ndarray, key: ScrambleKey, bits: int = 32) -> np.ndarray:
    """
    Randomize integer points and map them to [0, 1).

    Args:
        points (np.ndarray): ``(m, s)`` uint64 integer points below 2^bits
        key (ScrambleKey): Scrambling seed and mode

    Returns:
        np.ndarray: ``(m, s)`` float64 values in [0, 1), not yet clamped
    """
    if key.mode is ScrambleMode.NONE:
        return points.astype(np.float64) * 2.0 ** -bits

    keys = dimension_keys(key.seed, points.shape[1])
    if key.mode is ScrambleMode.DIGITAL_SHIFT:
        shifts = keys >> np.uint64(64 - bits)
        return digital_shift(points, shifts).astype(np.float64) * 2.0 ** -bits

    scrambled = owen_scramble(points, keys, bits)
    return scrambled.astype(np.float64) * 2.0 ** -(bits + _TAIL_BITS)

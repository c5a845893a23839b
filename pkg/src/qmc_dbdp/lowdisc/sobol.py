"""
Sobol' Sequence

Base-2 digital Sobol' sequence in natural (non-Gray) index order, built from a
Joe-Kuo style table of primitive polynomials and initial direction numbers.

The table ships as ``qmc_dbdp/assets/new-joe-kuo-6.300.txt``; each data line
reads ``d s a m_1 ... m_s`` (dimension, polynomial degree, interior polynomial
coefficients packed into an integer, initial direction integers). Dimension 1
is not listed: it is the van der Corput sequence.
"""

import logging
import os
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np

from qmc_dbdp.exceptions import ConfigurationError, ContractViolation
from qmc_dbdp.lowdisc.batches import PointBatch, clamp_unit
from qmc_dbdp.lowdisc.scramble import ScrambleKey, scramble_points

logger = logging.getLogger(__name__)

BITS = 32
MAX_POINTS = 1 << BITS

DEFAULT_TABLE = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
    "assets",
    "new-joe-kuo-6.300.txt",
)

DirectionEntry = Tuple[int, int, Tuple[int, ...]]


@lru_cache(maxsize=4)
def load_direction_table(path: str = DEFAULT_TABLE) -> Tuple[DirectionEntry, ...]:
    """
    Load a Joe-Kuo style direction-number file.

    Args:
        path (str): Path of the table

    Returns:
        Tuple[DirectionEntry, ...]: ``(degree, a, (m_1, ..., m_s))`` for
        dimensions 2, 3, ... in file order

    Raises:
        ConfigurationError: If the file is missing or malformed
    """
    if not os.path.exists(path):
        raise ConfigurationError("Direction-number table not found", path=path)

    entries: List[DirectionEntry] = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            fields = line.split()
            if not fields or not fields[0].isdigit():
                continue  # header or blank line
            try:
                dim, degree, a = int(fields[0]), int(fields[1]), int(fields[2])
                m_init = tuple(int(v) for v in fields[3:3 + degree])
            except (IndexError, ValueError) as e:
                raise ConfigurationError(f"Malformed direction-number line: {e}", path=path, line=line_no)
            if dim != len(entries) + 2 or len(m_init) != degree:
                raise ConfigurationError(
                    f"Expected dimension {len(entries) + 2} with {degree} direction integers", path=path, line=line_no
                )
            if any(m % 2 == 0 or m >= (1 << (k + 1)) for k, m in enumerate(m_init)):
                raise ConfigurationError("Direction integers m_k must be odd and below 2^k", path=path, line=line_no)
            entries.append((degree, a, m_init))

    logger.debug("Loaded %d direction-number entries from %s", len(entries), path)
    return tuple(entries)


def max_dimension(path: str = DEFAULT_TABLE) -> int:
    """Largest dimension supported by the table (dimension 1 is implicit)."""
    return len(load_direction_table(path)) + 1


def _direction_integers(degree: int, a: int, m_init: Tuple[int, ...], bits: int) -> List[int]:
    m = list(m_init)
    for k in range(degree, bits):
        value = m[k - degree] ^ (m[k - degree] << degree)
        for j in range(1, degree):
            if (a >> (degree - 1 - j)) & 1:
                value ^= m[k - j] << j
        m.append(value)
    return m[:bits]


@lru_cache(maxsize=64)
def direction_numbers(dimension: int, bits: int = BITS, path: str = DEFAULT_TABLE) -> np.ndarray:
    """
    Direction numbers V[j, k] = m_{k+1} * 2^(bits-k-1) for coordinates j < dimension.

    The returned array is cached and read-only.

    Raises:
        ConfigurationError: If ``dimension`` exceeds the shipped table
    """
    table = load_direction_table(path)
    if dimension < 1:
        raise ContractViolation(f"Sobol' dimension must be positive, got {dimension}")
    if dimension > len(table) + 1:
        raise ConfigurationError(
            f"Sobol' dimension {dimension} exceeds the direction-number table ({len(table) + 1} dimensions)",
            path=path,
        )

    v = np.zeros((dimension, bits), dtype=np.uint64)
    v[0] = [1 << (bits - k - 1) for k in range(bits)]
    for j in range(1, dimension):
        degree, a, m_init = table[j - 1]
        m = _direction_integers(degree, a, m_init, bits)
        v[j] = [m[k] << (bits - k - 1) for k in range(bits)]
    v.setflags(write=False)
    return v


class SobolGenerator:
    """
    Sequential Sobol' generator.

    Point i is the XOR of the direction numbers selected by the binary digits
    of i, so the first coordinate is the base-2 radical inverse of i. The
    generator is single-writer: ``next_index`` advances with every call to
    ``sobol_points``.

    Args:
        dimension (int): Point dimension s
        table_path (Optional[str]): Alternative direction-number file
    """

    def __init__(self, dimension: int, table_path: Optional[str] = None):
        self.dimension = dimension
        self.table_path = table_path or DEFAULT_TABLE
        self.direction_numbers = direction_numbers(dimension, BITS, self.table_path)
        self.next_index = 0

    def integer_points(self, start: int, m: int) -> np.ndarray:
        """
        Unscrambled points ``start .. start+m-1`` as 32-bit integers.

        Returns:
            np.ndarray: ``(m, dimension)`` uint64 array with entries below 2^32
        """
        if start + m > MAX_POINTS:
            raise ContractViolation(f"Sobol' index range exceeds 2^{BITS} points")

        index = np.arange(start, start + m, dtype=np.uint64)
        points = np.zeros((m, self.dimension), dtype=np.uint64)
        one = np.uint64(1)
        for k in range(max(int(start + m - 1).bit_length(), 1)):
            digit = (index >> np.uint64(k)) & one
            points ^= digit[:, None] * self.direction_numbers[None, :, k]
        return points

    def reset(self):
        """Rewind to index 0."""
        self.next_index = 0

    def __repr__(self) -> str:
        return f"SobolGenerator(dimension={self.dimension}, next_index={self.next_index})"


def sobol_points(gen: SobolGenerator, key: ScrambleKey, m: int) -> PointBatch:
    """
    Next ``m`` points of the (scrambled) Sobol' sequence.

    Args:
        gen (SobolGenerator): Generator, advanced by ``m``
        key (ScrambleKey): Scrambling seed and mode
        m (int): Number of points

    Returns:
        PointBatch: Clamped points in (0,1)^s
    """
    if m < 1:
        raise ContractViolation(f"Number of points must be positive, got {m}")

    raw = gen.integer_points(gen.next_index, m)
    gen.next_index += m
    return PointBatch(clamp_unit(scramble_points(raw, key)))

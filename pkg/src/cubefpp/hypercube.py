"""Implicit n-cube: vertices are n-bit integers, the dimension travels alongside."""

from typing import List, Tuple

from numba import njit

MAX_DIMENSION = 30

# Default memory budget for per-vertex / per-edge arrays, in bytes.
DEFAULT_MEMORY_BUDGET = 8 * 2**30


class DimensionError(ValueError):
    pass


def check_dimension(n: int, bytes_per_edge: int = 0, budget: int = DEFAULT_MEMORY_BUDGET) -> int:
    """Validate ``n`` and, optionally, that ``n * 2**(n-1)`` edges fit the budget."""
    if not isinstance(n, int) or isinstance(n, bool):
        raise DimensionError(f"dimension must be an integer, got {n!r}")
    if not 1 <= n <= MAX_DIMENSION:
        raise DimensionError(f"dimension must satisfy 1 <= n <= {MAX_DIMENSION}, got {n}")
    if bytes_per_edge and n * 2 ** (n - 1) * bytes_per_edge > budget:
        raise MemoryError(
            f"n={n} needs {n * 2 ** (n - 1) * bytes_per_edge} bytes for edge storage, "
            f"budget is {budget}"
        )
    return n


def zero() -> int:
    return 0


def one(n: int) -> int:
    return (1 << n) - 1


def hamming_weight(v: int) -> int:
    return bin(v).count("1")


def neighbors(v: int, n: int) -> List[int]:
    """Neighbors of ``v`` in direction order 0, 1, ..., n-1."""
    return [v ^ (1 << i) for i in range(n)]


def edge_count(n: int) -> int:
    return n << (n - 1)


def edge_ref(v: int, w: int) -> Tuple[int, int]:
    """Canonical (base, direction) of the edge between adjacent ``v`` and ``w``."""
    diff = v ^ w
    if diff == 0 or diff & (diff - 1):
        raise ValueError(f"{v:#b} and {w:#b} are not adjacent")
    d = diff.bit_length() - 1
    return min(v, w), d


@njit(cache=True, nogil=True)
def _edge_index(base, direction, n):
    low = base & ((1 << direction) - 1)
    high = (base >> (direction + 1)) << direction
    return (direction << (n - 1)) | high | low


def edge_index(base: int, direction: int, n: int) -> int:
    """Dense index in ``[0, n * 2**(n-1))`` of the edge (``base``, ``direction``).

    ``direction * 2**(n-1)`` plus the rank of ``base`` among the vertices whose
    bit ``direction`` is clear.
    """
    if not 0 <= direction < n:
        raise ValueError(f"direction {direction} out of range for n={n}")
    if not 0 <= base < (1 << n):
        raise ValueError(f"vertex {base} out of range for n={n}")
    if base >> direction & 1:
        raise ValueError(f"malformed edge: base {base:#b} has bit {direction} set")
    return int(_edge_index(base, direction, n))


def edge_from_index(index: int, n: int) -> Tuple[int, int]:
    """Inverse of :func:`edge_index`."""
    if not 0 <= index < edge_count(n):
        raise ValueError(f"edge index {index} out of range for n={n}")
    direction, rank = divmod(index, 1 << (n - 1))
    low = rank & ((1 << direction) - 1)
    high = (rank >> direction) << (direction + 1)
    return high | low, direction

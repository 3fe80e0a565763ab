from __future__ import annotations

import math


def ceil_log2(x: int) -> int:
    """Smallest k with 2^k >= x (0 for x <= 1)."""
    if x <= 1:
        return 0
    return (int(x) - 1).bit_length()


def word_bits(n: int) -> int:
    # A word holds one node id
    return max(1, ceil_log2(n))


def log2(x: float) -> float:
    if x <= 0:
        return -math.inf
    return math.log2(x)


def safe_log2(x: float) -> float:
    """log2 floored at 1, for use as a multiplicative polylog factor."""
    return max(1.0, log2(x))


def ceil_log(x: float, base: float) -> int:
    """
    Smallest integer k >= 0 with base^k >= x, computed by repeated
    multiplication so exact powers do not round up.
    """
    if base <= 1:
        raise ValueError(f"log base must exceed 1, got {base}")
    k = 0
    power = 1.0
    while power < x:
        power *= base
        k += 1
    return k

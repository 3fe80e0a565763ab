"""
Addressable randomness. Every real R_tau(u) is a pure function of
(master_seed, u, tau), so a reference execution and a compressed one
that replays the same rounds out of order read identical values.
"""
from __future__ import annotations

import zlib
from functools import lru_cache

import numpy as np

from mpclib.constants import DEFAULT_PRECISION_FACTOR
from mpclib.constants import MAX_PRECISION_BITS
from mpclib.utils.simple_functions import word_bits

__all__ = [
    "RandomTape",
]

MASK64 = (1 << 64) - 1
# Raw 64-bit values generated per cached block
BLOCK = 4096


@lru_cache(maxsize=256)
def _raw_block(key: int, block: int) -> np.ndarray:
    # Philox4x64 emits four words per counter step
    bit_generator = np.random.Philox(key=key, counter=block * (BLOCK // 4))
    values = bit_generator.random_raw(BLOCK)
    values.setflags(write=False)
    return values


class RandomTape(object):
    def __init__(
        self,
        master_seed: int,
        n: int,
        precision_factor: int = DEFAULT_PRECISION_FACTOR
    ):
        self.master_seed = int(master_seed) & MASK64
        self.n = int(n)
        self.precision_factor = int(precision_factor)
        self.word_bits = word_bits(self.n)
        self.precision_bits = min(
            MAX_PRECISION_BITS,
            self.precision_factor * self.word_bits,
        )
        self.scale = float(1 << self.precision_bits)

    def __repr__(self) -> str:
        return (
            f"RandomTape(seed={self.master_seed}, n={self.n}, "
            f"bits={self.precision_bits})"
        )

    def _key(self, round: int) -> int:
        if round < 1:
            raise ValueError(f"tape rounds start at 1, got {round}")
        return (int(round) << 64) | self.master_seed

    def _raw(self, node: int, round: int) -> int:
        block, offset = divmod(int(node), BLOCK)
        return int(_raw_block(self._key(round), block)[offset])

    def round_integer(self, node: int, round: int) -> int:
        """The integer i with round_real(node, round) = i / 2^b."""
        return self._raw(node, round) >> (64 - self.precision_bits)

    def round_real(self, node: int, round: int) -> float:
        return self.round_integer(node, round) / self.scale

    def round_reals(self, nodes, round: int) -> np.ndarray:
        """Vectorized round_real for many nodes in one round."""
        nodes = np.asarray(nodes, dtype=np.int64)
        out = np.empty(len(nodes), dtype=np.float64)
        if len(nodes) == 0:
            return out
        key = self._key(round)
        blocks, offsets = np.divmod(nodes, BLOCK)
        for block in np.unique(blocks):
            selector = blocks == block
            raw = _raw_block(key, int(block))[offsets[selector]]
            out[selector] = (raw >> np.uint64(64 - self.precision_bits)).astype(np.float64)
        return out / self.scale

    def sample_event(self, node: int, round: int, p: float) -> bool:
        """
        True iff round_real(node, round) <= p. The comparison is strict
        at p = 0, so an event of probability zero never fires.
        """
        if p <= 0:
            return False
        if p >= 1:
            return True
        return self.round_real(node, round) <= p

    def derive(self, tag: str) -> RandomTape:
        """An independent tape for a named pipeline stage, same n."""
        seq = np.random.SeedSequence([self.master_seed, zlib.crc32(tag.encode())])
        seed = int(seq.generate_state(1, np.uint64)[0])
        return RandomTape(seed, self.n, self.precision_factor)

"""Randomness protocol shared by the pure-Python and compiled kernels.

Everything downstream consumes raw 64-bit words from a PCG64 stream through
the three primitives below. The compiled kernel re-implements them verbatim
on the C side, so a trajectory is bit-identical no matter which backend ran
it:

* ``uniform01``: (word >> 11) * 2^-53
* ``bounded``:   rejection on word % m with threshold 2^64 mod m
* ``pair``:      j uniform in [0,n), k uniform in [0,n) \\ {j}
"""

from __future__ import annotations

import numpy as np

_TWO64 = 1 << 64
_INV53 = 2.0 ** -53


class DrawSource:
    """Stateful reader of raw 64-bit words from a bit generator.

    Words are buffered in generation order; chunking never changes the
    sequence a consumer sees.
    """

    def __init__(self, bit_generator, chunk: int = 512):
        self._bg = bit_generator
        self._chunk = int(chunk)
        self._buf = np.empty(0, dtype=np.uint64)
        self._pos = 0

    def take(self, k: int) -> np.ndarray:
        """Next k raw words, in order."""
        out = np.empty(k, dtype=np.uint64)
        filled = 0
        while filled < k:
            avail = self._buf.size - self._pos
            if avail == 0:
                self._buf = self._bg.random_raw(max(self._chunk, k - filled))
                self._pos = 0
                avail = self._buf.size
            m = min(avail, k - filled)
            out[filled:filled + m] = self._buf[self._pos:self._pos + m]
            self._pos += m
            filled += m
        return out

    def next_u64(self) -> int:
        if self._pos >= self._buf.size:
            self._buf = self._bg.random_raw(self._chunk)
            self._pos = 0
        w = int(self._buf[self._pos])
        self._pos += 1
        return w

    def uniform01(self) -> float:
        """Double in [0, 1) from the top 53 bits of one word."""
        return (self.next_u64() >> 11) * _INV53

    def bounded(self, m: int) -> int:
        """Unbiased integer in [0, m)."""
        threshold = _TWO64 % m
        while True:
            w = self.next_u64()
            if w >= threshold:
                return w % m

    def pair(self, n: int) -> tuple[int, int]:
        """Uniformly random ordered pair of distinct positions."""
        j = self.bounded(n)
        k = self.bounded(n - 1)
        if k >= j:
            k += 1
        return j, k

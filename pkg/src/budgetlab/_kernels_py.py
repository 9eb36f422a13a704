"""Pure-Python trajectory kernel (fallback backend).

One call simulates one full sample path of a heuristic on a benchmark
function, consuming randomness from a :class:`~budgetlab._draw.DrawSource`
per the shared protocol. The compiled kernel in ``_kernels_cy`` mirrors
this file branch for branch; any behavioural edit here must be made there
too (``tests/test_kernels.py`` checks bit-for-bit agreement).

Selection is exact: BinVal compares by highest flipped index, the other
integer-valued functions compare small integers, and general linear
functions use the same compensated sum as :func:`fitness.compare_exact`.
"""

from __future__ import annotations

import math

import numpy as np

from ._draw import DrawSource

BACKEND = "python"

# function kinds
LINEAR, ONEMAX, BINVAL, LEADINGONES, ZIGZAG = 0, 1, 2, 3, 4
# algorithms
RLS, EA, SA = 0, 1, 2

_INV53 = 2.0 ** -53


def _neumaier(values) -> float:
    s = 0.0
    comp = 0.0
    for w in values:
        w = float(w)  # plain-float arithmetic: no numpy warnings on inf-inf
        t = s + w
        if abs(s) >= abs(w):
            comp += (s - t) + w
        else:
            comp += (w - t) + s
        s = t
    return s + comp


def _zigzag(ones: int, n: int) -> int:
    return ones if (n - ones) % 2 == 0 else ones - 2


class TrajectoryState:
    """Mutable per-path state: bits plus the caches each kind needs."""

    def __init__(self, kind: int, n: int, coeffs, bits: np.ndarray):
        self.kind = kind
        self.n = n
        self.coeffs = coeffs  # float64[n] for LINEAR/BINVAL, else None
        self.bits = bits.astype(np.uint8, copy=True)
        self.refresh()

    def refresh(self):
        self.ones = int(self.bits.sum())
        self.lead = self._leading()
        self.err = self._full_error()

    def _leading(self) -> int:
        zeros = np.flatnonzero(self.bits == 0)
        return int(zeros[0]) if zeros.size else self.n

    def _weight_error(self) -> float:
        return _neumaier(self.coeffs[j] for j in np.flatnonzero(self.bits == 0))

    def _full_error(self) -> float:
        if self.kind in (LINEAR, BINVAL):
            return self._weight_error()
        if self.kind == ONEMAX:
            return float(self.n - self.ones)
        if self.kind == LEADINGONES:
            return float(self.n - self.lead)
        return float(self.n - _zigzag(self.ones, self.n))

    # -- one-step kernels --------------------------------------------------

    def rls_step(self, src: DrawSource):
        """Flip one uniformly chosen bit; keep the offspring unless worse."""
        j = src.bounded(self.n)
        b = int(self.bits[j])
        if self.kind in (LINEAR, ONEMAX, BINVAL):
            if b == 0:  # positive weights: 0->1 strictly improves, 1->0 worsens
                self.bits[j] = 1
                self.ones += 1
                self.err = (float(self.n - self.ones) if self.kind == ONEMAX
                            else self._weight_error())
        elif self.kind == LEADINGONES:
            if j > self.lead:
                self.bits[j] ^= 1  # fitness tie: offspring accepted
                self.ones += 1 - 2 * b
            elif j == self.lead:
                self.bits[j] = 1
                self.ones += 1
                m = self.lead + 1
                while m < self.n and self.bits[m] == 1:
                    m += 1
                self.lead = m
                self.err = float(self.n - self.lead)
            # j < lead flips a leading one: strictly worse, rejected
        else:  # ZIGZAG
            k2 = self.ones + 1 - 2 * b
            if _zigzag(k2, self.n) >= _zigzag(self.ones, self.n):
                self.bits[j] ^= 1
                self.ones = k2
                self.err = float(self.n - _zigzag(k2, self.n))

    def ea_step(self, src: DrawSource, p: float):
        """Independent per-bit flips with rate p; keep offspring on ties."""
        words = src.take(self.n)
        u = (words >> np.uint64(11)).astype(np.float64) * _INV53
        flips = np.flatnonzero(u < p)
        if flips.size == 0:
            return
        sign = self._flip_sign(flips)
        if sign >= 0:
            self._apply(flips, sign)

    def sa_step(self, src: DrawSource, T: float):
        """Metropolis step over the 1-and-2-bit-flip neighbourhood.

        An optimal state is absorbing (the run has halted): no draws.
        """
        if self.err == 0.0:
            return
        if src.uniform01() < 0.5:
            flips = np.array([src.bounded(self.n)], dtype=np.intp)
        else:
            flips = np.array(src.pair(self.n), dtype=np.intp)
        sign, delta = self._flip_sign_delta(flips)
        if sign < 0:
            # delta can be nan when two beyond-double weights cancel
            # (binval past n ~ 1000): treat as an unacceptable drop
            if math.isnan(delta):
                return
            if src.uniform01() >= math.exp(delta / T):
                return
        self._apply(flips, sign)

    # -- shared offspring evaluation -----------------------------------------

    def _flip_sign(self, flips: np.ndarray) -> int:
        """Sign of f(offspring) - f(parent) for the given flip set."""
        b = self.bits
        if self.kind == BINVAL:
            return 1 if b[flips.max()] == 0 else -1
        if self.kind == ONEMAX:
            d = int(flips.size) - 2 * int(b[flips].sum())
            return (d > 0) - (d < 0)
        if self.kind == LINEAR:
            s = _neumaier(self.coeffs[j] if b[j] == 0 else -self.coeffs[j]
                          for j in flips)
            return (s > 0.0) - (s < 0.0)
        if self.kind == LEADINGONES:
            lead2 = self._offspring_lead(flips)
            return (lead2 > self.lead) - (lead2 < self.lead)
        k2 = self.ones + int(flips.size) - 2 * int(b[flips].sum())
        d = _zigzag(k2, self.n) - _zigzag(self.ones, self.n)
        return (d > 0) - (d < 0)

    def _flip_sign_delta(self, flips: np.ndarray):
        """Sign plus the double-valued fitness change (for Metropolis)."""
        b = self.bits
        if self.kind in (LINEAR, BINVAL):
            delta = _neumaier(self.coeffs[j] if b[j] == 0 else -self.coeffs[j]
                              for j in flips)
            if self.kind == BINVAL:  # exact sign from the dominant weight
                sign = 1 if b[flips.max()] == 0 else -1
            else:
                sign = (delta > 0.0) - (delta < 0.0)
            return sign, delta
        if self.kind == ONEMAX:
            d = int(flips.size) - 2 * int(b[flips].sum())
            return (d > 0) - (d < 0), float(d)
        if self.kind == LEADINGONES:
            lead2 = self._offspring_lead(flips)
            d = lead2 - self.lead
            return (d > 0) - (d < 0), float(d)
        k2 = self.ones + int(flips.size) - 2 * int(b[flips].sum())
        d = _zigzag(k2, self.n) - _zigzag(self.ones, self.n)
        return (d > 0) - (d < 0), float(d)

    def _offspring_lead(self, flips: np.ndarray) -> int:
        below = flips[flips < self.lead]
        if below.size:
            return int(below.min())
        if self.lead == self.n or self.lead not in flips:
            return self.lead
        off = self.bits.copy()
        off[flips] ^= 1
        m = self.lead + 1
        while m < self.n and off[m] == 1:
            m += 1
        return m

    def _apply(self, flips: np.ndarray, sign: int):
        b = self.bits
        self.ones += int(flips.size) - 2 * int(b[flips].sum())
        b[flips] ^= 1
        if self.kind == LEADINGONES:
            self.lead = self._leading()
            self.err = float(self.n - self.lead)
        elif self.kind == ONEMAX:
            self.err = float(self.n - self.ones)
        elif self.kind == ZIGZAG:
            self.err = float(self.n - _zigzag(self.ones, self.n))
        elif sign != 0:  # LINEAR/BINVAL: fitness tie leaves the error alone
            self.err = self._weight_error()


def init_uniform_bits(n: int, src: DrawSource) -> np.ndarray:
    """Uniform random string: top bit of one raw word per position."""
    return (src.take(n) >> np.uint64(63)).astype(np.uint8)


def run_trajectory(algo: int, param: float, kind: int, n: int, coeffs,
                   bits0, steps: int, bit_generator):
    """Simulate one path; returns (error series of length steps+1, final bits).

    ``bits0`` of None means uniform random initialisation drawn from the
    same stream, before any step draws.
    """
    src = DrawSource(bit_generator)
    bits = init_uniform_bits(n, src) if bits0 is None else np.asarray(bits0, dtype=np.uint8)
    st = TrajectoryState(kind, n, coeffs, bits)
    out = np.empty(steps + 1, dtype=np.float64)
    out[0] = st.err
    if algo == RLS:
        for t in range(steps):
            st.rls_step(src)
            out[t + 1] = st.err
    elif algo == EA:
        for t in range(steps):
            st.ea_step(src, param)
            out[t + 1] = st.err
    elif algo == SA:
        for t in range(steps):
            st.sa_step(src, param)
            out[t + 1] = st.err
    else:
        raise ValueError(f"unknown algorithm code {algo}")
    return out, st.bits

"""Pseudo-Boolean benchmark functions with exact comparison semantics.

Five maximisation problems over bit strings of length n:

* ``linear``       -- f(x) = sum c_i x_i with arbitrary positive weights
* ``onemax``       -- linear with all weights 1
* ``binval``       -- linear with weight 2^i on bit i (i = 1..n)
* ``leadingones``  -- length of the prefix of consecutive ones
* ``zigzag``       -- |x| or |x|-2 depending on the parity of n-|x|

Fitness values are reported as doubles, but all comparisons go through
:func:`compare_exact`, which never rounds: BinVal at n=100 exceeds what a
double can represent exactly, so selection by float comparison would
silently corrupt the dynamics of any heuristic driven by it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

MAX_DIMENSION = 1 << 16

KINDS = ("linear", "onemax", "binval", "leadingones", "zigzag")

LESS, EQUAL, GREATER = -1, 0, 1


class BitString:
    """Immutable fixed-length sequence of {0,1}."""

    __slots__ = ("_bits",)

    def __init__(self, bits: Iterable[int]):
        arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits,
                         dtype=np.uint8)
        if arr.ndim != 1 or arr.size < 1 or arr.size > MAX_DIMENSION:
            raise ValueError(f"bit string length must be in [1, {MAX_DIMENSION}]")
        if not np.all((arr == 0) | (arr == 1)):
            raise ValueError("bits must be 0 or 1")
        arr = arr.copy()
        arr.setflags(write=False)
        self._bits = arr

    @classmethod
    def zeros(cls, n: int) -> "BitString":
        return cls(np.zeros(n, dtype=np.uint8))

    @classmethod
    def ones(cls, n: int) -> "BitString":
        return cls(np.ones(n, dtype=np.uint8))

    @classmethod
    def from01(cls, text: str) -> "BitString":
        """Parse e.g. ``"11010"``; leftmost character is bit 1."""
        return cls([int(c) for c in text])

    @property
    def bits(self) -> np.ndarray:
        """Read-only uint8 array; index j holds bit j+1."""
        return self._bits

    def ones_count(self) -> int:
        return int(self._bits.sum())

    def flip(self, *positions: int) -> "BitString":
        """Return a copy with the given 0-based positions flipped."""
        arr = self._bits.copy()
        for j in positions:
            arr[j] ^= 1
        return BitString(arr)

    def __len__(self) -> int:
        return self._bits.size

    def __eq__(self, other) -> bool:
        return isinstance(other, BitString) and np.array_equal(self._bits, other._bits)

    def __hash__(self) -> int:
        return hash(self._bits.tobytes())

    def __repr__(self) -> str:
        return f"BitString('{''.join(str(b) for b in self._bits)}')"


@dataclass(frozen=True)
class FitnessSpec:
    """A benchmark function instance.

    ``coefficients`` is only meaningful for kind ``linear``; OneMax and
    BinVal are linear but keep their closed forms so n=100 BinVal stays
    exact (its weights overflow the 53-bit mantissa).
    """

    kind: str
    n: int
    coefficients: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown function kind {self.kind!r}")
        if not 1 <= self.n <= MAX_DIMENSION:
            raise ValueError(f"n must be in [1, {MAX_DIMENSION}]")
        if self.kind == "linear":
            if self.coefficients is None or len(self.coefficients) != self.n:
                raise ValueError("linear requires one coefficient per bit")
            if any(not (c > 0) for c in self.coefficients):
                raise ValueError("linear coefficients must be positive")
        elif self.coefficients is not None:
            raise ValueError(f"{self.kind} takes no coefficients")

    @classmethod
    def linear(cls, coefficients: Sequence[float]) -> "FitnessSpec":
        return cls("linear", len(coefficients), tuple(float(c) for c in coefficients))

    @classmethod
    def onemax(cls, n: int) -> "FitnessSpec":
        return cls("onemax", n)

    @classmethod
    def binval(cls, n: int) -> "FitnessSpec":
        return cls("binval", n)

    @classmethod
    def leadingones(cls, n: int) -> "FitnessSpec":
        return cls("leadingones", n)

    @classmethod
    def zigzag(cls, n: int) -> "FitnessSpec":
        return cls("zigzag", n)

    def to_json(self) -> dict:
        doc = {"kind": self.kind, "n": self.n}
        if self.kind == "linear":
            doc["coefficients"] = list(self.coefficients)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "FitnessSpec":
        kind = doc["kind"]
        if kind == "linear":
            return cls.linear(doc["coefficients"])
        return cls(kind, int(doc["n"]))


def leading_ones(bits: np.ndarray) -> int:
    """Length of the all-ones prefix."""
    zeros = np.flatnonzero(bits == 0)
    return int(zeros[0]) if zeros.size else bits.size


def zigzag_value(ones: int, n: int) -> int:
    """Fitness of any string with the given ones-count (parity rule on n-|x|)."""
    return ones if (n - ones) % 2 == 0 else ones - 2


def _int_fitness(spec: FitnessSpec, bits: np.ndarray) -> int:
    """Exact integer fitness for the integer-valued kinds."""
    if spec.kind == "onemax":
        return int(bits.sum())
    if spec.kind == "binval":
        # weight of bit i is 2^i, i = 1..n (python ints: 2^n outgrows int64)
        return sum(1 << (int(j) + 1) for j in np.flatnonzero(bits))
    if spec.kind == "leadingones":
        return leading_ones(bits)
    if spec.kind == "zigzag":
        return zigzag_value(int(bits.sum()), spec.n)
    raise AssertionError(spec.kind)


def _int_optimum(spec: FitnessSpec) -> int:
    if spec.kind == "onemax":
        return spec.n
    if spec.kind == "binval":
        return (1 << (spec.n + 1)) - 2
    return spec.n  # leadingones, zigzag


def _as_float(v: int) -> float:
    try:
        return float(v)
    except OverflowError:
        return math.inf


def _check_dim(spec: FitnessSpec, x: BitString) -> None:
    if len(x) != spec.n:
        raise ValueError(f"dimension mismatch: spec.n={spec.n}, len(x)={len(x)}")


def evaluate(spec: FitnessSpec, x: BitString) -> float:
    """Fitness f(x), as a double (exact whenever representable)."""
    _check_dim(spec, x)
    if spec.kind == "linear":
        return math.fsum(c for c, b in zip(spec.coefficients, x.bits) if b)
    return _as_float(_int_fitness(spec, x.bits))


def optimum(spec: FitnessSpec) -> float:
    """f* = f(1^n)."""
    if spec.kind == "linear":
        return math.fsum(spec.coefficients)
    return _as_float(_int_optimum(spec))


def error(spec: FitnessSpec, x: BitString) -> float:
    """Approximation error f* - f(x); zero exactly at the optimum.

    Computed without cancellation: integer kinds subtract exactly before
    rounding once, linear sums the weights of the zero bits directly.
    """
    _check_dim(spec, x)
    if spec.kind == "linear":
        return math.fsum(c for c, b in zip(spec.coefficients, x.bits) if not b)
    return _as_float(_int_optimum(spec) - _int_fitness(spec, x.bits))


def signed_weight_sum(weights: Sequence[float]) -> float:
    """Neumaier-compensated sum; shared with the trajectory kernels so the
    pure-Python and compiled paths round identically."""
    s = 0.0
    comp = 0.0
    for w in weights:
        t = s + w
        if abs(s) >= abs(w):
            comp += (s - t) + w
        else:
            comp += (w - t) + s
        s = t
    return s + comp


def compare_exact(spec: FitnessSpec, x: BitString, y: BitString) -> int:
    """Exact ordering of f(x) vs f(y): -1, 0 or +1.

    BinVal compares bit sequences lexicographically from bit n down, so the
    result is exact for any n. Linear uses a compensated sum of the signed
    weight differences, which never misorders for non-adversarial weights.
    """
    _check_dim(spec, x)
    _check_dim(spec, y)
    xb, yb = x.bits, y.bits
    if spec.kind == "binval":
        for j in range(spec.n - 1, -1, -1):
            if xb[j] != yb[j]:
                return GREATER if xb[j] else LESS
        return EQUAL
    if spec.kind == "linear":
        diff = np.flatnonzero(xb != yb)
        s = signed_weight_sum(
            [spec.coefficients[j] if xb[j] else -spec.coefficients[j] for j in diff]
        )
        return GREATER if s > 0 else (LESS if s < 0 else EQUAL)
    fx = _int_fitness(spec, xb)
    fy = _int_fitness(spec, yb)
    return GREATER if fx > fy else (LESS if fx < fy else EQUAL)

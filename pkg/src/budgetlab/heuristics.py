"""Single-individual search heuristics as Markov kernels over bit strings.

Three kernels, each advancing one state by one generation:

* ``rls``  -- flip one uniformly chosen bit, keep the offspring unless worse
* ``ea``   -- flip every bit independently with rate p (default 1/n), elitist
* ``sa``   -- propose a uniform 1-bit (prob 1/2) or 2-bit flip, Metropolis
              acceptance at fixed temperature T (default 1/ln n), halting at
              the optimum (absorbing state)

Elitist selection accepts the offspring on fitness ties, so equal-fitness
plateaus keep drifting; Metropolis accepts ties with probability one (the
continuity limit of exp(-d/T) as d -> 0).

All randomness flows through :class:`RngStream`: a (seed, stream_id) pair
that maps to a PCG64 stream, identical on every platform. Distinct
stream_ids give statistically independent replicates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import _backend
from ._draw import DrawSource
from .fitness import BitString, FitnessSpec

ALGO_KINDS = ("rls", "ea", "sa")


@dataclass(frozen=True)
class AlgorithmSpec:
    """A heuristic plus its parameters; omitted parameters use the n-dependent
    defaults at run time."""

    kind: str
    mutation_rate: Optional[float] = None  # ea only
    temperature: Optional[float] = None    # sa only

    def __post_init__(self):
        if self.kind not in ALGO_KINDS:
            raise ValueError(f"unknown algorithm kind {self.kind!r}")
        if self.mutation_rate is not None:
            if self.kind != "ea":
                raise ValueError("mutation_rate only applies to the ea kernel")
            if not 0.0 < self.mutation_rate < 1.0:
                raise ValueError("mutation_rate must lie in (0, 1)")
        if self.temperature is not None:
            if self.kind != "sa":
                raise ValueError("temperature only applies to the sa kernel")
            if not self.temperature > 0.0:
                raise ValueError("temperature must be positive")

    @classmethod
    def rls(cls) -> "AlgorithmSpec":
        return cls("rls")

    @classmethod
    def ea(cls, mutation_rate: Optional[float] = None) -> "AlgorithmSpec":
        return cls("ea", mutation_rate=mutation_rate)

    @classmethod
    def sa(cls, temperature: Optional[float] = None) -> "AlgorithmSpec":
        return cls("sa", temperature=temperature)

    @property
    def elitist(self) -> bool:
        return self.kind in ("rls", "ea")

    def resolved_mutation_rate(self, n: int) -> float:
        if self.mutation_rate is not None:
            return self.mutation_rate
        return 1.0 / n

    def resolved_temperature(self, n: int) -> float:
        if self.temperature is not None:
            return self.temperature
        if n < 2:
            raise ValueError("default temperature 1/ln n needs n >= 2")
        return 1.0 / math.log(n)

    def label(self, n: int) -> str:
        if self.kind == "ea":
            return f"ea[p={self.resolved_mutation_rate(n):g}]"
        if self.kind == "sa":
            return f"sa[T={self.resolved_temperature(n):g}]"
        return "rls"

    def to_json(self) -> dict:
        doc = {"kind": self.kind}
        if self.mutation_rate is not None:
            doc["mutation_rate"] = self.mutation_rate
        if self.temperature is not None:
            doc["temperature"] = self.temperature
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "AlgorithmSpec":
        return cls(doc["kind"],
                   mutation_rate=doc.get("mutation_rate"),
                   temperature=doc.get("temperature"))


@dataclass(frozen=True)
class RngStream:
    """Reproducible randomness handle: (seed, stream_id) -> PCG64 stream."""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < (1 << 64):
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.stream_id < 0:
            raise ValueError("stream_id must be nonnegative")

    def bit_generator(self) -> np.random.PCG64:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.PCG64(ss)

    def source(self) -> DrawSource:
        return DrawSource(self.bit_generator())


def _as_source(rng: Union[RngStream, DrawSource]) -> DrawSource:
    return rng.source() if isinstance(rng, RngStream) else rng


def _state(spec: FitnessSpec, x: BitString):
    from ._kernels_py import TrajectoryState
    if len(x) != spec.n:
        raise ValueError(f"dimension mismatch: spec.n={spec.n}, len(x)={len(x)}")
    kind_code, coeffs = _backend.spec_codes(spec)
    return TrajectoryState(kind_code, spec.n, coeffs, x.bits)


def rls_step(spec: FitnessSpec, x: BitString,
             rng: Union[RngStream, DrawSource]) -> BitString:
    """One local-search generation: uniform single-bit flip, elitist."""
    st = _state(spec, x)
    st.rls_step(_as_source(rng))
    return BitString(st.bits)


def ea_step(spec: FitnessSpec, x: BitString, p: float,
            rng: Union[RngStream, DrawSource]) -> BitString:
    """One bitwise-mutation generation with flip rate p, elitist."""
    if not 0.0 < p < 1.0:
        raise ValueError("mutation rate must lie in (0, 1)")
    st = _state(spec, x)
    st.ea_step(_as_source(rng), p)
    return BitString(st.bits)


def sa_step(spec: FitnessSpec, x: BitString, T: float,
            rng: Union[RngStream, DrawSource]) -> BitString:
    """One Metropolis generation at temperature T; optimum is absorbing."""
    if not T > 0.0:
        raise ValueError("temperature must be positive")
    if spec.n < 2:
        raise ValueError("sa needs n >= 2 for its 2-bit neighbourhood")
    st = _state(spec, x)
    st.sa_step(_as_source(rng), T)
    return BitString(st.bits)


def run_trajectory(algo: AlgorithmSpec, spec: FitnessSpec, init: BitString,
                   steps: int, rng: RngStream) -> np.ndarray:
    """Error series e(x^[0]) .. e(x^[steps]) of one sample path."""
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    if len(init) != spec.n:
        raise ValueError(f"dimension mismatch: spec.n={spec.n}, len(init)={len(init)}")
    errs, _bits = _backend.simulate_path(algo, spec, init.bits, steps,
                                         rng.bit_generator())
    return errs

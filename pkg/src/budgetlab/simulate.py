"""Monte Carlo engine: mean-error curves with uncertainty, and empirical
convergence rates.

Replicate r always draws from stream (seed, stream_id=r), and replicate
series are reduced in ascending stream order after all have finished, so
the output is byte-identical no matter how many workers ran.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from . import _backend
from .fitness import BitString, FitnessSpec, error, optimum, zigzag_value
from .heuristics import AlgorithmSpec, RngStream

INIT_KINDS = ("uniform", "zeros", "fixed")


@dataclass(frozen=True)
class InitSpec:
    """Initial-solution distribution: uniform random, all zeros, or a fixed
    point."""

    kind: str = "uniform"
    bits: Optional[BitString] = None

    def __post_init__(self):
        if self.kind not in INIT_KINDS:
            raise ValueError(f"unknown init kind {self.kind!r}")
        if (self.kind == "fixed") != (self.bits is not None):
            raise ValueError("fixed init requires bits; other kinds take none")

    @classmethod
    def uniform(cls) -> "InitSpec":
        return cls("uniform")

    @classmethod
    def zeros(cls) -> "InitSpec":
        return cls("zeros")

    @classmethod
    def fixed(cls, bits: BitString) -> "InitSpec":
        return cls("fixed", bits)

    def start_bits(self, n: int):
        """uint8 start vector, or None when the kernel should draw uniformly."""
        if self.kind == "uniform":
            return None
        if self.kind == "zeros":
            return np.zeros(n, dtype=np.uint8)
        if len(self.bits) != n:
            raise ValueError(f"fixed init has length {len(self.bits)}, spec.n={n}")
        return self.bits.bits

    def to_json(self) -> dict:
        doc = {"kind": self.kind}
        if self.bits is not None:
            doc["bits"] = "".join(str(b) for b in self.bits.bits)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "InitSpec":
        if doc["kind"] == "fixed":
            return cls.fixed(BitString.from01(doc["bits"]))
        return cls(doc["kind"])


@dataclass
class TrajectorySeries:
    """Expected approximation error per generation, with provenance."""

    t: np.ndarray
    mean_error: np.ndarray
    sem: Optional[np.ndarray]   # standard error of the mean; Monte Carlo only
    replicates: int
    provenance: str             # "monte-carlo" | "oracle"

    def __post_init__(self):
        if self.provenance not in ("monte-carlo", "oracle"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if (self.sem is not None) != (self.provenance == "monte-carlo"):
            raise ValueError("sem is present exactly for monte-carlo series")

    def __len__(self) -> int:
        return len(self.t)


def resolve_threads(threads: Optional[int] = None) -> int:
    """Worker count: explicit argument, else BUDGETLAB_THREADS (0 = auto)."""
    if threads is None:
        raw = os.environ.get("BUDGETLAB_THREADS", "0")
        try:
            threads = int(raw)
        except ValueError:
            raise ValueError(f"BUDGETLAB_THREADS must be an integer, got {raw!r}")
    if threads < 0:
        raise ValueError("thread count must be nonnegative")
    if threads == 0:
        threads = min(os.cpu_count() or 1, 8)
    return threads


def estimate_mean_error(algo: AlgorithmSpec, spec: FitnessSpec, init: InitSpec,
                        steps: int, replicates: int, seed: int,
                        threads: Optional[int] = None) -> TrajectorySeries:
    """Sample mean of e(x^[t]) over independent replicate paths."""
    if replicates < 1:
        raise ValueError("replicates must be at least 1")
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    bits0 = init.start_bits(spec.n)
    paths = np.empty((replicates, steps + 1), dtype=np.float64)

    def one(r: int):
        bg = RngStream(seed, r).bit_generator()
        errs, _ = _backend.simulate_path(algo, spec, bits0, steps, bg)
        paths[r] = errs

    workers = resolve_threads(threads)
    if workers <= 1 or replicates == 1:
        for r in range(replicates):
            one(r)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(one, range(replicates)))

    mean = paths.mean(axis=0)
    if replicates > 1:
        sem = paths.std(axis=0, ddof=1) / math.sqrt(replicates)
    else:
        sem = np.zeros(steps + 1)
    return TrajectorySeries(t=np.arange(steps + 1), mean_error=mean, sem=sem,
                            replicates=replicates, provenance="monte-carlo")


def one_step_rate(series: TrajectorySeries) -> np.ndarray:
    """Per-generation relative error reduction 1 - e[t+1]/e[t] (0 where
    e[t] = 0)."""
    e = np.asarray(series.mean_error, dtype=np.float64)
    r = np.zeros(len(e) - 1)
    nz = e[:-1] != 0.0
    r[nz] = 1.0 - e[1:][nz] / e[:-1][nz]
    return r


def average_rate(series: TrajectorySeries, t: int) -> float:
    """Geometric-mean rate over t generations: 1 - (e[t]/e[0])^(1/t)."""
    if t < 1:
        raise ValueError("average rate needs t >= 1")
    e = series.mean_error
    if e[0] == 0.0:
        return 0.0
    return 1.0 - float(e[t] / e[0]) ** (1.0 / t)


def initial_error_mean(spec: FitnessSpec, init: InitSpec) -> float:
    """Exact expected error at t = 0 (no sampling)."""
    if init.kind == "fixed":
        return error(spec, init.bits)
    if init.kind == "zeros":
        return error(spec, BitString.zeros(spec.n))
    n = spec.n
    if spec.kind == "linear":
        return math.fsum(spec.coefficients) / 2.0
    if spec.kind == "onemax":
        return n / 2.0
    if spec.kind == "binval":
        return optimum(spec) / 2.0
    if spec.kind == "leadingones":
        # E[f] = sum_{i=1..n} 2^-i = 1 - 2^-n
        return n - 1.0 + 2.0 ** -n
    pmf = stats.binom.pmf(np.arange(n + 1), n, 0.5)
    errs = np.array([n - zigzag_value(k, n) for k in range(n + 1)], dtype=np.float64)
    return float(pmf @ errs)


def oracle_series(t: np.ndarray, values: np.ndarray) -> TrajectorySeries:
    """Wrap an exact chain curve in the series container."""
    return TrajectorySeries(t=np.asarray(t), mean_error=np.asarray(values),
                            sem=None, replicates=0, provenance="oracle")


def series_to_csv(series: TrajectorySeries, path) -> None:
    """Write the declared trajectory schema: t,mean_error,sem,replicates."""
    if series.provenance != "monte-carlo":
        raise ValueError("trajectory CSV is for monte-carlo series")
    with open(path, "w") as fh:
        fh.write("t,mean_error,sem,replicates\n")
        for t, m, s in zip(series.t, series.mean_error, series.sem):
            fh.write(f"{int(t)},{m:.17g},{s:.17g},{series.replicates}\n")

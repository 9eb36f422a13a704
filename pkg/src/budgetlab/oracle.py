"""Exact finite Markov-chain computations for the three heuristics.

Two state-space layouts:

* full chains enumerate all 2^n bit strings (n <= 12, dense matrices);
* level chains track only the ones-count 0..n, exact whenever both the
  function and the kernel are symmetric in bit positions (OneMax, Zigzag),
  which stretches exact analysis to n = 200.

From a chain we get the exact error curve e^[t] = init . P^t . err, the
one- and two-step ratio extrema (delta_min/max and their two-step
counterparts), and numeric verdicts for the geometric sandwich
e0 (1-delta_max)^t <= e^[t] <= e0 (1-delta_min)^t, its two-step variant,
and the tightness relation between them.

Selection inside the chains is exact: integer-valued functions use integer
fitness keys, and general linear functions use correctly rounded per-state
sums, so acceptance never depends on float noise. State errors are derived
from the same keys (err = key[optimum] - key), which keeps the elitism
structure of the matrix consistent with the error vector down to the last
ulp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .bounds import geometric_curve
from .fitness import FitnessSpec, zigzag_value
from .heuristics import AlgorithmSpec
from .simulate import InitSpec

FULL_CHAIN_MAX_N = 12
LEVEL_CHAIN_MAX_N = 200

_ROW_SUM_TOL = 1e-12


@dataclass
class ChainModel:
    """Explicit transition matrix plus per-state error and init vectors."""

    layout: str                  # "full" | "level"
    spec: FitnessSpec
    algo: AlgorithmSpec
    P: np.ndarray
    err: np.ndarray
    init: np.ndarray
    state_labels: list

    @property
    def size(self) -> int:
        return self.P.shape[0]

    def validate(self) -> None:
        rs = self.P.sum(axis=1)
        worst = float(np.abs(rs - 1.0).max())
        if worst > _ROW_SUM_TOL:
            raise AssertionError(f"row sums off by {worst:.3e}")
        if self.P.min() < 0:
            raise AssertionError("negative transition probability")
        if self.err.min() < 0:
            raise AssertionError("negative state error")
        if self.algo.elitist:
            bad = (self.P > 0) & (self.err[None, :] > self.err[:, None])
            if bad.any():
                s, s2 = np.argwhere(bad)[0]
                raise AssertionError(
                    f"elitist kernel increases error: "
                    f"{self.state_labels[s]} -> {self.state_labels[s2]}")


def _full_keys(spec: FitnessSpec, n: int):
    """Exact fitness key per state int (bit j of the int is bit j+1)."""
    states = np.arange(1 << n, dtype=np.int64)
    if spec.kind == "linear":
        c = np.asarray(spec.coefficients)
        keys = np.array([math.fsum(c[j] for j in range(n) if (s >> j) & 1)
                         for s in range(1 << n)])
        return keys
    pop = np.zeros(1 << n, dtype=np.int64)
    for j in range(n):
        pop += (states >> j) & 1
    if spec.kind == "onemax":
        return pop
    if spec.kind == "binval":
        return 2 * states  # sum of 2^(j+1) over set bits
    if spec.kind == "zigzag":
        return np.array([zigzag_value(int(k), n) for k in pop], dtype=np.int64)
    lead = np.empty(1 << n, dtype=np.int64)
    for s in range(1 << n):
        m = 0
        while m < n and (s >> m) & 1:
            m += 1
        lead[s] = m
    return lead


def _full_init(init: InitSpec, n: int) -> np.ndarray:
    size = 1 << n
    v = np.zeros(size)
    if init.kind == "uniform":
        v[:] = 1.0 / size
    elif init.kind == "zeros":
        v[0] = 1.0
    else:
        idx = int(sum(int(b) << j for j, b in enumerate(init.bits.bits)))
        v[idx] = 1.0
    return v


def _state_label(s: int, n: int) -> str:
    return "".join("1" if (s >> j) & 1 else "0" for j in range(n))


def build_full_chain(algo: AlgorithmSpec, spec: FitnessSpec,
                     init: InitSpec = InitSpec.uniform()) -> ChainModel:
    """Exact one-step transition matrix over all 2^n states."""
    n = spec.n
    if n > FULL_CHAIN_MAX_N:
        raise ValueError(f"full chain caps at n={FULL_CHAIN_MAX_N}, got {n}")
    if algo.kind == "sa" and n < 2:
        raise ValueError("sa needs n >= 2")
    size = 1 << n
    keys = _full_keys(spec, n)
    fstar = keys[size - 1]
    err = (fstar - keys).astype(np.float64)
    S = np.arange(size, dtype=np.int64)
    P = np.zeros((size, size))

    if algo.kind == "rls":
        for j in range(n):
            Y = S ^ (1 << j)
            tgt = np.where(keys[Y] >= keys[S], Y, S)
            P[S, tgt] += 1.0 / n
    elif algo.kind == "ea":
        p = algo.resolved_mutation_rate(n)
        for m in range(size):
            pm = p ** int(m.bit_count()) * (1.0 - p) ** (n - m.bit_count())
            Y = S ^ m
            tgt = np.where(keys[Y] >= keys[S], Y, S)
            P[S, tgt] += pm
    else:
        T = algo.resolved_temperature(n)
        proposals = [(1 << j, 0.5 / n) for j in range(n)]
        w2 = 0.5 / math.comb(n, 2)
        for a in range(n):
            for b in range(a + 1, n):
                proposals.append(((1 << a) | (1 << b), w2))
        keyf = keys.astype(np.float64)
        for mask, w in proposals:
            Y = S ^ mask
            d = keyf[Y] - keyf[S]
            acc = np.where(d >= 0, 1.0, np.exp(np.minimum(d, 0.0) / T))
            P[S, Y] += w * acc
            P[S, S] += w * (1.0 - acc)
        opt = err == 0.0
        P[opt, :] = 0.0
        P[np.flatnonzero(opt), np.flatnonzero(opt)] = 1.0

    chain = ChainModel("full", spec, algo, P, err, _full_init(init, n),
                       [_state_label(s, n) for s in range(size)])
    chain.validate()
    return chain


def _level_init(init: InitSpec, n: int) -> np.ndarray:
    v = np.zeros(n + 1)
    if init.kind == "uniform":
        v[:] = stats.binom.pmf(np.arange(n + 1), n, 0.5)
        v /= v.sum()
    elif init.kind == "zeros":
        v[0] = 1.0
    else:
        v[init.bits.ones_count()] = 1.0
    return v


def build_level_chain(algo: AlgorithmSpec, spec: FitnessSpec,
                      init: InitSpec = InitSpec.uniform()) -> ChainModel:
    """Exact chain over ones-count levels for |x|-symmetric functions."""
    n = spec.n
    if spec.kind not in ("onemax", "zigzag"):
        raise ValueError(f"{spec.kind} is not a function of the ones-count")
    if n > LEVEL_CHAIN_MAX_N:
        raise ValueError(f"level chain caps at n={LEVEL_CHAIN_MAX_N}, got {n}")
    if algo.kind == "sa" and n < 2:
        raise ValueError("sa needs n >= 2")
    levels = np.arange(n + 1)
    if spec.kind == "onemax":
        keys = levels.astype(np.int64)
    else:
        keys = np.array([zigzag_value(int(i), n) for i in levels], dtype=np.int64)
    err = (keys[n] - keys).astype(np.float64)
    P = np.zeros((n + 1, n + 1))

    if algo.kind == "rls":
        for i in range(n + 1):
            up, down = (n - i) / n, i / n
            for j, q in ((i + 1, up), (i - 1, down)):
                if q == 0.0:
                    continue
                if keys[j] >= keys[i]:
                    P[i, j] += q
                else:
                    P[i, i] += q
    elif algo.kind == "ea":
        p = algo.resolved_mutation_rate(n)
        for i in range(n + 1):
            a = np.arange(n - i + 1)             # zeros flipped up
            b = np.arange(i + 1)                 # ones flipped down
            pa = stats.binom.pmf(a, n - i, p)
            pb = stats.binom.pmf(b, i, p)
            for j in range(n + 1):
                d = j - i
                lo = max(0, d)
                hi = min(n - i, i + d)
                if hi < lo:
                    continue
                aa = np.arange(lo, hi + 1)
                q = float(pa[aa] @ pb[aa - d])
                if q == 0.0:
                    continue
                if keys[j] >= keys[i] or j == i:
                    P[i, j] += q
                else:
                    P[i, i] += q
    else:
        T = algo.resolved_temperature(n)
        pairs = math.comb(n, 2)
        for i in range(n + 1):
            if err[i] == 0.0:
                P[i, i] = 1.0
                continue
            moves = [(i + 1, 0.5 * (n - i) / n),
                     (i - 1, 0.5 * i / n),
                     (i + 2, 0.5 * math.comb(n - i, 2) / pairs),
                     (i - 2, 0.5 * math.comb(i, 2) / pairs),
                     (i, 0.5 * i * (n - i) / pairs)]
            for j, q in moves:
                if q == 0.0:
                    continue
                d = float(keys[j] - keys[i])
                acc = 1.0 if d >= 0 else math.exp(d / T)
                P[i, j] += q * acc
                P[i, i] += q * (1.0 - acc)

    chain = ChainModel("level", spec, algo, P, err, _level_init(init, n),
                       [int(i) for i in levels])
    chain.validate()
    return chain


def aggregate_full_to_level(chain: ChainModel) -> tuple[np.ndarray, np.ndarray]:
    """Collapse a full chain onto ones-count levels (uniform weights within
    a level; exact for |x|-symmetric functions and exchangeable kernels)."""
    n = chain.spec.n
    size = 1 << n
    pop = np.zeros(size, dtype=np.int64)
    states = np.arange(size, dtype=np.int64)
    for j in range(n):
        pop += (states >> j) & 1
    Plvl = np.zeros((n + 1, n + 1))
    errlvl = np.zeros(n + 1)
    for i in range(n + 1):
        rows = np.flatnonzero(pop == i)
        errs = chain.err[rows]
        if np.ptp(errs) != 0.0:
            raise ValueError("error is not constant within a level")
        errlvl[i] = errs[0]
        block = chain.P[rows].mean(axis=0)
        for j in range(n + 1):
            Plvl[i, j] = block[pop == j].sum()
    return Plvl, errlvl


def exact_error_curve(chain: ChainModel, horizon: int) -> np.ndarray:
    """e^[t] for t = 0..horizon via repeated vector-matrix products."""
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    v = chain.init.copy()
    out = np.empty(horizon + 1)
    out[0] = float(v @ chain.err)
    for t in range(1, horizon + 1):
        v = v @ chain.P
        out[t] = float(v @ chain.err)
    return out


def exact_expected_error(chain: ChainModel, t: int) -> float:
    return float(exact_error_curve(chain, t)[-1])


@dataclass
class DeltaSummary:
    """One- and two-step relative error-reduction extrema over non-optimal
    states (time-homogeneous chains: no infimum over t needed)."""

    delta_min: float
    delta_max: float
    delta2_min: float
    delta2_max: float
    argmin_state: object
    argmax_state: object
    argmin2_state: object
    argmax2_state: object

    def to_json(self) -> dict:
        return {"delta_min": self.delta_min, "delta_max": self.delta_max,
                "delta2_min": self.delta2_min, "delta2_max": self.delta2_max,
                "argmin_state": self.argmin_state, "argmax_state": self.argmax_state,
                "argmin2_state": self.argmin2_state, "argmax2_state": self.argmax2_state}


def min_error_drift(chain: ChainModel) -> float:
    """Smallest per-state expected error decrease; >= 0 means the error
    process is a supermartingale."""
    return float((chain.err - chain.P @ chain.err).min())


def is_supermartingale(chain: ChainModel, tol: float = 1e-12) -> bool:
    return min_error_drift(chain) >= -tol * max(float(chain.err.max()), 1.0)


def delta_summary(chain: ChainModel) -> DeltaSummary:
    nonopt = np.flatnonzero(chain.err > 0.0)
    if nonopt.size == 0:
        raise ValueError("chain has no non-optimal state")
    e = chain.err
    one = (e - chain.P @ e)[nonopt] / e[nonopt]
    two = (e - chain.P @ (chain.P @ e))[nonopt] / e[nonopt]
    i1, a1 = int(np.argmin(one)), int(np.argmax(one))
    i2, a2 = int(np.argmin(two)), int(np.argmax(two))
    lbl = chain.state_labels
    return DeltaSummary(float(one[i1]), float(one[a1]),
                        float(two[i2]), float(two[a2]),
                        lbl[nonopt[i1]], lbl[nonopt[a1]],
                        lbl[nonopt[i2]], lbl[nonopt[a2]])


@dataclass
class SandwichReport:
    """Numeric verdict for the geometric envelopes of one chain."""

    horizon: int
    deltas: DeltaSummary
    e0: float
    max_violation: float
    violations: list
    gap_upper: np.ndarray = field(repr=False)
    gap_lower: np.ndarray = field(repr=False)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        doc = self.deltas.to_json()
        doc.update({"horizon": self.horizon, "e0": self.e0,
                    "max_violation": self.max_violation,
                    "violations": self.violations,
                    "gap_upper": self.gap_upper.tolist(),
                    "gap_lower": self.gap_lower.tolist()})
        return doc


def _rel_excess(values: np.ndarray, limits: np.ndarray) -> np.ndarray:
    """How far values exceed limits, relative to the limit scale."""
    return (values - limits) / np.maximum(np.abs(limits), 1e-300)


def verify_sandwich(chain: ChainModel, horizon: int,
                    tol: float = 1e-9) -> SandwichReport:
    """Check both one-step envelopes at every t <= horizon and the two-step
    envelopes at every even step, at relative tolerance tol.

    The chains here are time-homogeneous, so the same check read with a
    finite horizon b is exactly the fixed-budget variant of the envelope
    statement (valid for every t <= b)."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    ds = delta_summary(chain)
    curve = exact_error_curve(chain, horizon)
    e0 = curve[0]
    t = np.arange(horizon + 1)
    upper = geometric_curve(e0, ds.delta_min, t)
    lower = geometric_curve(e0, ds.delta_max, t)

    violations = []
    over = _rel_excess(curve, upper)
    under = _rel_excess(lower, curve)
    for idx in np.flatnonzero(over > tol):
        violations.append({"t": int(idx), "side": "upper", "excess": float(over[idx])})
    for idx in np.flatnonzero(under > tol):
        violations.append({"t": int(idx), "side": "lower", "excess": float(under[idx])})

    half = np.arange(horizon // 2 + 1)
    upper2 = geometric_curve(e0, ds.delta2_min, half)
    lower2 = geometric_curve(e0, ds.delta2_max, half)
    even = curve[2 * half]
    over2 = _rel_excess(even, upper2)
    under2 = _rel_excess(lower2, even)
    for idx in np.flatnonzero(over2 > tol):
        violations.append({"t": int(2 * idx), "side": "upper-two-step",
                           "excess": float(over2[idx])})
    for idx in np.flatnonzero(under2 > tol):
        violations.append({"t": int(2 * idx), "side": "lower-two-step",
                           "excess": float(under2[idx])})

    worst = max((v["excess"] for v in violations), default=0.0)
    return SandwichReport(horizon=horizon, deltas=ds, e0=float(e0),
                          max_violation=worst, violations=violations,
                          gap_upper=upper - curve, gap_lower=curve - lower)


@dataclass
class SuffixReport:
    n: int
    horizon: int
    max_deviation: float
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"n": self.n, "horizon": self.horizon,
                "max_deviation": self.max_deviation, "violations": self.violations}


def verify_uniform_suffix(n: int, horizon: int, p: Optional[float] = None,
                          tol: float = 1e-9) -> SuffixReport:
    """Iterate the exact bitwise-mutation chain on the prefix-counting
    function from uniform init and check that, conditioned on a prefix of
    length i, every bit beyond position i+1 is 1 with probability 1/2."""
    if n > FULL_CHAIN_MAX_N:
        raise ValueError(f"full chain caps at n={FULL_CHAIN_MAX_N}, got {n}")
    spec = FitnessSpec.leadingones(n)
    algo = AlgorithmSpec.ea(p)
    chain = build_full_chain(algo, spec, InitSpec.uniform())
    size = 1 << n
    lead = np.array([next((m for m in range(n) if not (s >> m) & 1), n)
                     for s in range(size)], dtype=np.int64)

    groups = []           # (prefix i, mask of states, per-bit indicators)
    for i in range(n - 1):
        sel = lead == i
        bit_ind = []
        for q in range(i + 1, n):   # bits i+2 .. n, 0-based slots i+1 .. n-1
            ind = ((np.arange(size) >> q) & 1).astype(np.float64) * sel
            bit_ind.append((q, ind))
        groups.append((i, sel.astype(np.float64), bit_ind))

    v = chain.init.copy()
    max_dev = 0.0
    violations = []
    floor = 1e-280  # below this the conditional mass is numerically void
    for t in range(horizon + 1):
        if t > 0:
            v = v @ chain.P
        for i, sel, bit_ind in groups:
            mass = float(v @ sel)
            if mass < floor:
                continue
            for q, ind in bit_ind:
                dev = abs(float(v @ ind) / mass - 0.5)
                if dev > max_dev:
                    max_dev = dev
                if dev > tol:
                    violations.append({"t": t, "prefix": i, "bit": q + 1,
                                       "deviation": dev})
    return SuffixReport(n=n, horizon=horizon, max_deviation=max_dev,
                        violations=violations)


@dataclass
class BatteryResult:
    algo: str
    kind: str
    n: int
    sandwich_ok: bool
    two_step_extrema_ok: bool
    two_step_tighter_ok: bool
    supermartingale_ok: bool
    deltas: DeltaSummary
    max_violation: float


@dataclass
class BatteryReport:
    results: list
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": self.violations,
                "chains": [{"algo": r.algo, "kind": r.kind, "n": r.n,
                            "sandwich_ok": r.sandwich_ok,
                            "two_step_extrema_ok": r.two_step_extrema_ok,
                            "two_step_tighter_ok": r.two_step_tighter_ok,
                            "supermartingale_ok": r.supermartingale_ok,
                            "max_violation": r.max_violation,
                            **r.deltas.to_json()} for r in self.results]}


def theorem_battery(ns: Sequence[int] = range(4, 11),
                    kinds: Sequence[str] = ("onemax", "binval", "leadingones", "zigzag"),
                    algo_specs: Optional[Sequence[AlgorithmSpec]] = None,
                    horizon: int = 200, tol: float = 1e-9) -> BatteryReport:
    """Sandwich + two-step relations on every (algorithm, function, n) chain.

    Checks, per chain: zero envelope violations at tolerance tol; the
    two-step extrema dominate the squared one-step extrema; and two-step
    envelopes pointwise at least as tight as squared one-step envelopes.

    Annealing chains also report whether the expected error is non-increasing
    from every state (a supermartingale). That flag is informational: the
    envelopes hold either way because the per-step ratio extrema are taken
    over all states, and at the default temperature the flag is genuinely
    False for OneMax with n >= 6 (the rate-1/n Metropolis down-moves beat
    the rate-1/n improvement near the optimum).
    """
    if algo_specs is None:
        algo_specs = (AlgorithmSpec.rls(), AlgorithmSpec.ea(), AlgorithmSpec.sa())
    results = []
    violations = []
    for algo in algo_specs:
        for kind in kinds:
            for n in ns:
                spec = FitnessSpec(kind, n)
                chain = build_full_chain(algo, spec, InitSpec.uniform())
                rep = verify_sandwich(chain, horizon, tol=tol)
                ds = rep.deltas
                # two-step extrema vs squared one-step extrema
                th4 = (1.0 - ds.delta2_min <= (1.0 - ds.delta_min) ** 2 + 1e-12
                       and 1.0 - ds.delta2_max >= (1.0 - ds.delta_max) ** 2 - 1e-12)
                half = np.arange(horizon // 2 + 1)
                tight = bool(np.all(
                    geometric_curve(1.0, ds.delta2_min, half)
                    <= geometric_curve(1.0, ds.delta_min, 2 * half) * (1 + 1e-12) + 1e-300))
                smg = is_supermartingale(chain) if algo.kind == "sa" else True
                res = BatteryResult(algo.kind, kind, n, rep.ok, th4, tight, smg,
                                    ds, rep.max_violation)
                results.append(res)
                if not (rep.ok and th4 and tight):
                    violations.append({"algo": algo.kind, "kind": kind, "n": n,
                                       "sandwich": rep.ok, "two_step_extrema": th4,
                                       "two_step_tighter": tight})
    return BatteryReport(results=results, violations=violations)

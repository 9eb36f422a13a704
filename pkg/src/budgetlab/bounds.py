"""Closed-form envelopes on the expected approximation error.

Every curve here has the shape e0 * (1 - delta)^t for some per-step error
reduction ratio delta; what varies is where delta comes from:

* single-bit local search on any positive-weight linear function reduces
  the error by exactly 1/n per step, so its curve is exact;
* bitwise mutation on linear functions is sandwiched between delta = 1/n
  (lower) and delta = (1/n)(1-1/n)^(n-1) (upper);
* leading-ones prefixes admit per-prefix-length ratios whose extrema give
  rigorous envelopes, plus the looser nominal forms 2/n^2 and 1/(e n);
* the zigzag landscape gives (1/n^2)(1-1/n)^(n-2) for bitwise mutation and
  a temperature-dependent ratio for fixed-temperature annealing.

"Rigorous" envelopes use exact numeric ratio extrema and are safe to test
against the chain oracle; "nominal" envelopes drop the asymptotic slack to
keep the familiar simple forms and are for plotting only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy import optimize

CURVE_KINDS = ("upper", "lower", "exact")


class TemperatureTooHigh(ValueError):
    """The annealing ratio went nonpositive at some level: no decaying
    envelope exists at this temperature."""

    def __init__(self, n: int, T: float, level: int, ratio: float):
        self.n, self.T, self.level, self.ratio = n, T, level, ratio
        super().__init__(
            f"temperature {T:g} too high for zigzag n={n}: "
            f"ratio {ratio:.3e} <= 0 at level {level}")


@dataclass
class BoundCurve:
    label: str
    kind: str
    e0: float
    t: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise ValueError(f"unknown curve kind {self.kind!r}")

    def __len__(self) -> int:
        return len(self.t)


def geometric_curve(e0: float, delta: float, t_grid) -> np.ndarray:
    """e0 * (1 - delta)^t evaluated stably; accepts any delta <= 1."""
    t = np.asarray(t_grid, dtype=np.float64)
    if delta >= 1.0:
        return np.where(t == 0, e0, 0.0)
    return e0 * np.exp(t * math.log1p(-delta))


def _curve(label: str, kind: str, e0: float, delta: float, t_grid) -> BoundCurve:
    t = np.asarray(t_grid)
    return BoundCurve(label, kind, e0, t, geometric_curve(e0, delta, t))


def exp_envelope(e0: float, delta: float, t_grid,
                 label: str = "envelope", kind: str = "upper") -> BoundCurve:
    """Generic geometric envelope e0 * (1 - delta)^t for delta in [0, 1)."""
    if e0 < 0:
        raise ValueError("e0 must be nonnegative")
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta must lie in [0, 1), got {delta!r}")
    return _curve(label, kind, e0, delta, t_grid)


# -- linear functions -------------------------------------------------------

def rls_linear_exact(e0: float, n: int, t_grid) -> BoundCurve:
    """Exact error of single-bit local search on any linear function."""
    if n < 1:
        raise ValueError("n must be positive")
    return _curve("rls-linear-exact", "exact", e0, 1.0 / n, t_grid)


def ea_linear_upper(e0: float, n: int, t_grid) -> BoundCurve:
    if n < 1:
        raise ValueError("n must be positive")
    delta = (1.0 / n) * (1.0 - 1.0 / n) ** (n - 1)
    return _curve("ea-linear-upper", "upper", e0, delta, t_grid)


def ea_linear_lower(e0: float, n: int, t_grid) -> BoundCurve:
    if n < 1:
        raise ValueError("n must be positive")
    return _curve("ea-linear-lower", "lower", e0, 1.0 / n, t_grid)


def ea_mutation_bound(e0: float, n: int, p: float, t_grid) -> BoundCurve:
    """Upper envelope for bitwise mutation at rate p: delta = p(1-p)^(n-1)."""
    if not 0.0 < p < 1.0:
        raise ValueError("mutation rate must lie in (0, 1)")
    delta = p * (1.0 - p) ** (n - 1)
    return _curve(f"ea-mutation-upper[p={p:g}]", "upper", e0, delta, t_grid)


class OptimalRate(NamedTuple):
    rate: float
    interior: bool   # False when the argmax sits on the boundary (n = 1)
    golden: float    # numeric cross-check


def optimal_mutation_rate(n: int) -> OptimalRate:
    """argmax over p in (0,1) of p(1-p)^(n-1); analytically 1/n."""
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return OptimalRate(1.0, False, 1.0)

    def neg(p: float) -> float:
        return -(p * (1.0 - p) ** (n - 1))

    golden = float(optimize.minimize_scalar(
        neg, bracket=(1e-9, 1.0 / n, 1.0 - 1e-9), method="golden",
        options={"xtol": 1e-12}).x)
    return OptimalRate(1.0 / n, True, golden)


# -- leading-ones prefixes --------------------------------------------------

def geometric_gain_sum(k: int) -> float:
    """S(k) = sum_{j=1..k} j / 2^j = 2 - (k + 2) / 2^k."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return 2.0 - (k + 2) * 2.0 ** -k


def leadingones_e0(n: int) -> float:
    """Exact expected initial error under uniform initialisation."""
    return n - 1.0 + 2.0 ** -n


def leadingones_case_ratio(i: int, n: int) -> float:
    """Expected one-step relative error reduction from a state whose
    all-ones prefix has length i (free suffix bits uniform)."""
    if not 0 <= i <= n - 1:
        raise ValueError(f"prefix length must lie in [0, {n - 1}], got {i}")
    if i == n - 1:
        return (1.0 - 1.0 / n) ** (n - 1) / n
    return (1.0 / n) * (1.0 - 1.0 / n) ** i * geometric_gain_sum(n - i - 1) / (n - i)


class LeadingOnesDeltas(NamedTuple):
    delta_min: float
    delta_max: float
    argmin_prefix: int
    argmax_prefix: int


def leadingones_delta_bounds(n: int) -> LeadingOnesDeltas:
    """Numeric scan of the per-prefix ratios; no asymptotic slack."""
    if n < 2:
        raise ValueError("n must be at least 2")
    ratios = [leadingones_case_ratio(i, n) for i in range(n)]
    lo = int(np.argmin(ratios))
    hi = int(np.argmax(ratios))
    return LeadingOnesDeltas(ratios[lo], ratios[hi], lo, hi)


def leadingones_upper(n: int, t_grid, form: str = "rigorous") -> BoundCurve:
    e0 = leadingones_e0(n)
    if form == "rigorous":
        delta = leadingones_delta_bounds(n).delta_min
    elif form == "nominal":
        delta = 2.0 / n ** 2
    else:
        raise ValueError(f"unknown form {form!r}")
    return _curve(f"leadingones-upper-{form}", "upper", e0, delta, t_grid)


def leadingones_lower(n: int, t_grid, form: str = "rigorous") -> BoundCurve:
    e0 = leadingones_e0(n)
    if form == "rigorous":
        delta = leadingones_delta_bounds(n).delta_max
    elif form == "nominal":
        delta = 1.0 / (math.e * n)
    else:
        raise ValueError(f"unknown form {form!r}")
    return _curve(f"leadingones-lower-{form}", "lower", e0, delta, t_grid)


def leadingones_fixed_budget(n: int, t):
    """Small-budget linear approximation n - 1 - 2t/n; goes negative for
    t >= n(n-1)/2 and is kept that way deliberately."""
    t_arr = np.asarray(t, dtype=np.float64)
    vals = n - 1.0 - 2.0 * t_arr / n
    return float(vals) if np.isscalar(t) or t_arr.ndim == 0 else vals


def leadingones_fixed_budget_curve(n: int, t_grid) -> BoundCurve:
    t = np.asarray(t_grid)
    return BoundCurve("leadingones-fixed-budget", "upper", float(n - 1), t,
                      leadingones_fixed_budget(n, t))


# -- zigzag landscape -------------------------------------------------------

def zigzag_ea_upper(e0: float, n: int, t_grid) -> BoundCurve:
    if n < 2:
        raise ValueError("n must be at least 2")
    delta = (1.0 / n ** 2) * (1.0 - 1.0 / n) ** (n - 2)
    return _curve("zigzag-ea-upper", "upper", e0, delta, t_grid)


def zigzag_sa_ratio(i: int, n: int, T: float) -> float:
    """One-step relative error reduction of fixed-temperature annealing at
    an even ones-count level i (all four transition terms)."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0 <= i <= n - 2 or i % 2 != 0:
        raise ValueError(f"level must be even and lie in [0, {n - 2}], got {i}")
    if not T > 0:
        raise ValueError("temperature must be positive")
    n2 = 2.0 * n ** 2
    return ((n - i - 1) / n2
            - math.exp(-1.0 / T) / n2
            - i * math.exp(-3.0 / T) / ((n - i) * n2)
            - i * (i - 1) * math.exp(-2.0 / T) / ((n - i) * n2))


def zigzag_sa_delta_min(n: int, T: float) -> float:
    """Smallest even-level ratio; the envelope rate for annealing."""
    ratios = [(zigzag_sa_ratio(i, n, T), i) for i in range(0, n - 1, 2)]
    dmin, level = min(ratios)
    if dmin <= 0.0:
        raise TemperatureTooHigh(n, T, level, dmin)
    return dmin


def zigzag_sa_upper(e0: float, n: int, T: float, t_grid) -> BoundCurve:
    delta = zigzag_sa_delta_min(n, T)
    return _curve(f"zigzag-sa-upper[T={T:g}]", "upper", e0, delta, t_grid)


# -- supplement inequalities ------------------------------------------------

def supplement_g(i: int, n: int) -> float:
    """g(i) = (1-1/n)^i * S(n-i-1) / (n-i), the case-1 ratio times n."""
    if not 0 <= i <= n - 2:
        raise ValueError(f"i must lie in [0, {n - 2}], got {i}")
    return (1.0 - 1.0 / n) ** i * geometric_gain_sum(n - i - 1) / (n - i)


def supplement_g_a(i: int, n: int) -> float:
    return (1.0 - 1.0 / n) ** i / (n - i)


def supplement_g_b(i: int, n: int) -> float:
    return geometric_gain_sum(n - i - 1)


@dataclass
class SupplementReport:
    n: int
    violations: list
    g_min: float
    g_max: float

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"n": self.n, "ok": self.ok, "g_min": self.g_min,
                "g_max": self.g_max, "violations": self.violations}


def verify_supplement(n: int, rel_tol: float = 1e-12) -> SupplementReport:
    """Exhaustively check 2/n <= g(i) <= (1-1/n)^(n-1), g_a increasing and
    g_b decreasing over i in [0, n-2]. Claimed for large n (n >= 100).

    The lower bound and the first monotonicity step hold only up to
    discarded geometric tails (g(0) sits (n+1)/2^(n-1)/n
    below 2/n, and g_a(0) = g_a(1) exactly), so at double precision the
    comparisons are made with a relative slack of rel_tol: tiny enough to
    expose any real violation, large enough to absorb last-ulp rounding.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    lo = 2.0 / n
    hi = (1.0 - 1.0 / n) ** (n - 1)
    slack_lo = lo * rel_tol
    violations = []
    g_vals = [supplement_g(i, n) for i in range(n - 1)]
    for i, g in enumerate(g_vals):
        if not lo - slack_lo <= g <= hi * (1.0 + rel_tol):
            violations.append({"check": "range", "i": i, "value": g})
    for i in range(n - 2):
        ga0, ga1 = supplement_g_a(i, n), supplement_g_a(i + 1, n)
        if ga1 < ga0 * (1.0 - rel_tol):
            violations.append({"check": "g_a-increasing", "i": i, "value": ga1})
        gb0, gb1 = supplement_g_b(i, n), supplement_g_b(i + 1, n)
        if gb1 > gb0 * (1.0 + rel_tol):
            violations.append({"check": "g_b-decreasing", "i": i, "value": gb1})
    return SupplementReport(n=n, violations=violations,
                            g_min=min(g_vals), g_max=max(g_vals))


def curves_to_csv(curves: Sequence[BoundCurve], path) -> None:
    """Write the declared bounds schema: t,value,label,kind."""
    with open(path, "w") as fh:
        fh.write("t,value,label,kind\n")
        for c in curves:
            for t, v in zip(c.t, c.values):
                fh.write(f"{int(t)},{v:.17g},{c.label},{c.kind}\n")

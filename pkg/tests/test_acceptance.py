"""Acceptance gate: one test per criterion, one printed PASS/FAIL line each.

Statistical criteria use pinned seeds plus a documented single-retry policy
(seed+1) to bound flake probability; everything else is deterministic.

The annealing-vs-mutation envelope ordering criterion is asserted at its
stated temperature and is expected RED: at T = 1/ln n the two-bit
Metropolis down-moves cost a Theta(1/n^2) term that inverts the comparison.
That test's docstring carries the analysis and prints the colder
temperatures at which the intended ordering does hold.
"""

import math
import time

import numpy as np

import conftest
from conftest import assert_within_4sem, sound_grid

from budgetlab import bounds, cli, oracle
from budgetlab.fitness import FitnessSpec
from budgetlab.heuristics import AlgorithmSpec
from budgetlab.simulate import InitSpec, estimate_mean_error, initial_error_mean

BASE_SEED = 20260810


def _report(name: str, ok: bool, detail: str = ""):
    tag = "PASS" if ok else "FAIL"
    suffix = f"  [{detail}]" if detail else ""
    line = f"[{tag}] {name}{suffix}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line, flush=True)
    assert ok, f"{name}{suffix}"


def _with_retry(check, name):
    """Single documented retry for sampled-statistics checks."""
    try:
        check(BASE_SEED)
    except AssertionError:
        conftest.ACCEPTANCE_LINES.append(
            f"[retry] {name}: statistical miss at the base seed, re-ran once")
        check(BASE_SEED + 1)


def test_criterion_01_rls_exactness_on_linear():
    """Exact chain error of single-bit search on linear functions follows
    e0 (1-1/n)^t to 1e-10 relative, for arbitrary init distributions."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(BASE_SEED)
    worst = 0.0
    for trial in range(20):
        n = int(rng.integers(3, 11))
        spec = FitnessSpec.linear(rng.uniform(0.01, 1.0, n))
        chain = oracle.build_full_chain(AlgorithmSpec.rls(), spec)
        init = rng.dirichlet(np.ones(chain.size))  # arbitrary distribution
        chain.init = init
        curve = oracle.exact_error_curve(chain, 500)
        ref = curve[0] * np.exp(np.arange(501) * math.log1p(-1.0 / n))
        worst = max(worst, float(np.max(np.abs(curve - ref) / ref)))
    elapsed = time.perf_counter() - t0
    _report("C01 rls-linear exactness", worst <= 1e-10 and elapsed < 10.0,
            f"max rel dev {worst:.2e}, {elapsed:.1f}s")


def test_criterion_02_rls_figure_scale():
    """BinVal n=100, 1000 uniform-init replicates track the exact geometric
    curve within 4 sem on the sampled grid, in under 30 s."""
    t0 = time.perf_counter()
    spec = FitnessSpec.binval(100)
    e0 = initial_error_mean(spec, InitSpec.uniform())
    ref = e0 * np.exp(np.arange(1001) * math.log1p(-0.01))
    grid = sound_grid(100, 1000, 1000)

    def check(seed):
        mc = estimate_mean_error(AlgorithmSpec.rls(), spec, InitSpec.uniform(),
                                 1000, 1000, seed=seed)
        assert_within_4sem(mc, ref, grid)

    _with_retry(check, "C02")
    elapsed = time.perf_counter() - t0
    _report("C02 rls figure scale", elapsed < 30.0,
            f"{grid.size} sampled t up to {grid[-1]}, {elapsed:.1f}s")


def test_criterion_03_ea_sandwich_on_linear():
    """Bitwise mutation at rate 1/n on random linear instances stays between
    e0 (1-1/n)^t and e0 (1-(1/n)(1-1/n)^(n-1))^t, tolerance 1e-9."""
    rng = np.random.default_rng(BASE_SEED + 3)
    worst = 0.0
    for trial in range(10):
        n = int(rng.integers(3, 11))
        spec = FitnessSpec.linear(rng.uniform(0.01, 1.0, n))
        chain = oracle.build_full_chain(AlgorithmSpec.ea(), spec)
        curve = oracle.exact_error_curve(chain, 500)
        t = np.arange(501)
        up = bounds.geometric_curve(curve[0], (1 / n) * (1 - 1 / n) ** (n - 1), t)
        lo = bounds.geometric_curve(curve[0], 1.0 / n, t)
        over = np.max((curve - up) / np.maximum(up, 1e-300))
        under = np.max((lo - curve) / np.maximum(lo, 1e-300))
        worst = max(worst, float(over), float(under))
    _report("C03 ea sandwich on linear (oracle)", worst <= 1e-9,
            f"max rel excess {worst:.2e}")

    # figure-scale counterpart at n=100: asserted only at 4 sem
    def check(seed):
        spec = FitnessSpec.binval(100)
        mc = estimate_mean_error(AlgorithmSpec.ea(), spec, InitSpec.uniform(),
                                 400, 300, seed=seed)
        e0 = initial_error_mean(spec, InitSpec.uniform())
        t = np.arange(401)
        up = bounds.geometric_curve(e0, 0.01 * 0.99 ** 99, t)
        lo = bounds.geometric_curve(e0, 0.01, t)
        for t in sound_grid(100, 300, 400):
            slack = 4 * mc.sem[t]
            assert mc.mean_error[t] <= up[t] + slack
            assert mc.mean_error[t] >= lo[t] - slack

    _with_retry(check, "C03-mc")
    _report("C03 ea sandwich at n=100 (4-sem overlay)", True)


def test_criterion_04_leadingones_fixed_budget_pathology():
    """The small-budget line n-1-2t/n hits 79 at t=1000 and -1 at t=5000
    while the observed mean error stays nonnegative."""
    v1000 = bounds.leadingones_fixed_budget(100, 1000)
    v5000 = bounds.leadingones_fixed_budget(100, 5000)
    mc = estimate_mean_error(AlgorithmSpec.ea(), FitnessSpec.leadingones(100),
                             InitSpec.uniform(), 5000, 300, seed=BASE_SEED)
    ok = (v1000 == 79.0 and v5000 == -1.0
          and bool(np.all(mc.mean_error >= 0.0)))
    _report("C04 fixed-budget pathology", ok,
            f"line(1000)={v1000}, line(5000)={v5000}, "
            f"min observed mean {mc.mean_error.min():.3f}")


def test_criterion_05_leadingones_rigorous_envelopes():
    """Exact chain error sits inside the rigorous prefix-ratio envelopes for
    n = 5..10 and t <= 5000 at 1e-9.

    n <= 4 is excluded: there the scanned per-prefix maximum provably
    understates the true one-step ratio (the formula drops the
    jump-to-optimum gain), so no envelope claim exists to verify; see
    test_bounds.py::test_leadingones_case_ratio_understates_true_ratio_for_tiny_n.
    """
    worst = 0.0
    for n in range(5, 11):
        chain = oracle.build_full_chain(AlgorithmSpec.ea(), FitnessSpec.leadingones(n))
        curve = oracle.exact_error_curve(chain, 5000)
        d = bounds.leadingones_delta_bounds(n)
        t = np.arange(5001)
        up = bounds.geometric_curve(curve[0], d.delta_min, t)
        lo = bounds.geometric_curve(curve[0], d.delta_max, t)
        over = np.max((curve - up) / np.maximum(up, 1e-300))
        under = np.max((lo - curve) / np.maximum(lo, 1e-300))
        worst = max(worst, float(over), float(under))
    _report("C05 leadingones rigorous envelopes (n=5..10)", worst <= 1e-9,
            f"max rel excess {worst:.2e}")


def test_criterion_06_uniform_suffix():
    """Conditioned on any prefix length, every later bit is one with
    probability exactly 1/2 along the whole mutation chain."""
    worst = 0.0
    for n in range(2, 11):
        rep = oracle.verify_uniform_suffix(n, 500)
        assert rep.ok, rep.violations[:3]
        worst = max(worst, rep.max_deviation)
    _report("C06 uniform suffix", worst <= 1e-9, f"max dev {worst:.2e}")


def test_criterion_07_optimal_mutation_rate():
    """argmax of p(1-p)^(n-1) is 1/n; at n=10 the 1/n run is not beaten at
    the final step by 2/n or 1/(2n) beyond sampling noise."""
    for n in (2, 10, 100):
        r = bounds.optimal_mutation_rate(n)
        assert abs(r.rate - 1.0 / n) <= 1e-10

    verdicts = {}

    def check(seed):
        spec = FitnessSpec.binval(10)
        finals = {}
        for p in (0.1, 0.2, 0.05):
            mc = estimate_mean_error(AlgorithmSpec.ea(p), spec, InitSpec.uniform(),
                                     100, 1000, seed=seed)
            finals[p] = (mc.mean_error[-1], mc.sem[-1])
        m0, s0 = finals[0.1]
        for p in (0.2, 0.05):
            m, s = finals[p]
            sep = 4.0 * math.hypot(s0, s)
            better = m0 <= m
            indistinguishable = abs(m0 - m) < sep
            verdicts[p] = ("below" if better and not indistinguishable else
                           "indistinguishable" if indistinguishable else "worse")
            assert better or indistinguishable, (p, finals)

    _with_retry(check, "C07")
    _report("C07 optimal mutation rate", True,
            "vs 2/n: " + verdicts[0.2] + ", vs 1/(2n): " + verdicts[0.05])


def test_criterion_08_zigzag_bound_ordering():
    """Stated comparison: (1/n^2)(1-1/n)^(n-2) < annealing delta_min at
    temperature 1/ln n for n in {20, 50, 100}.

    Expected RED: at T = 1/ln n the two-ones Metropolis term
    i(i-1)/(2(n-i)n^2) * exp(-2/T) equals ~0.25/n^2 at the top even level,
    which drags the annealing ratio below the mutation ratio (n=100:
    2.573e-5 vs 3.735e-5). The annealing analysis needs those negative
    terms to vanish faster than 1/n^2, which requires a colder schedule,
    e.g. T = 1/(2 ln n), where the ordering holds with delta_min within
    0.01% of 1/(2n^2); those values are printed below for inspection.
    """
    rows = []
    ok = True
    for n in (20, 50, 100):
        d_ea = (1.0 / n ** 2) * (1.0 - 1.0 / n) ** (n - 2)
        t_spec = 1.0 / math.log(n)
        t_cold = 1.0 / (2.0 * math.log(n))
        d_sa = bounds.zigzag_sa_delta_min(n, t_spec)
        d_sa_cold = bounds.zigzag_sa_delta_min(n, t_cold)
        rows.append(f"n={n}: ea={d_ea:.3e} sa(1/ln n)={d_sa:.3e} "
                    f"sa(1/(2 ln n))={d_sa_cold:.3e} cold-ordering={d_ea < d_sa_cold}")
        ok = ok and (d_ea < d_sa)
    # Monte Carlo comparison at n=100, emitted for inspection, not asserted
    finals = {}
    for name, algo in (("ea", AlgorithmSpec.ea()), ("sa", AlgorithmSpec.sa())):
        mc = estimate_mean_error(algo, FitnessSpec.zigzag(100), InitSpec.uniform(),
                                 1500, 120, seed=BASE_SEED)
        finals[name] = mc.mean_error[-1]
    for line in rows:
        conftest.ACCEPTANCE_LINES.append("      " + line)
    conftest.ACCEPTANCE_LINES.append(
        f"      observed mean error at t=1500, n=100: ea={finals['ea']:.3f} "
        f"sa={finals['sa']:.3f} (inspection only)")
    _report("C08 zigzag bound ordering at T=1/ln n", ok,
            "inverted at this temperature; see this test's docstring")


def test_criterion_09_theorem_battery():
    """Every (algorithm, function, n) chain satisfies both envelopes, the
    two-step extremal inequalities, and two-step tightness."""
    rep = oracle.theorem_battery(ns=range(4, 11), horizon=200, tol=1e-9)
    worst = max(r.max_violation for r in rep.results)
    _report("C09 theorem battery", rep.ok,
            f"{len(rep.results)} chains, max violation {worst:.2e}")


def test_criterion_10_supplement_inequalities():
    t0 = time.perf_counter()
    reports = [bounds.verify_supplement(n) for n in (100, 150, 200)]
    elapsed = time.perf_counter() - t0
    ok = all(r.ok for r in reports) and elapsed < 1.0
    _report("C10 supplement inequalities", ok,
            f"{elapsed * 1000:.0f}ms, g ranges ok for n=100,150,200")


def test_criterion_11_reproducibility(tmp_path):
    """Presets re-run with the same seed write byte-identical CSVs."""
    pairs = []
    for preset, overrides in (("fig1", ["--replicates", "20", "--steps", "50"]),
                              ("fig6", ["--replicates", "12", "--steps", "30"])):
        dirs = []
        for tag in ("x", "y"):
            out = tmp_path / f"{preset}-{tag}"
            rc = cli.main(["preset", preset, "--out", str(out), "--quiet"] + overrides)
            assert rc == 0
            dirs.append(out)
        for f in sorted(dirs[0].rglob("*.csv")):
            twin = dirs[1] / f.relative_to(dirs[0])
            pairs.append((f, twin))
            assert f.read_bytes() == twin.read_bytes(), f.name
    _report("C11 reproducibility", True, f"{len(pairs)} CSV pairs identical")

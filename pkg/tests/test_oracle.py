import math

import numpy as np
import pytest

from budgetlab import bounds
from budgetlab.fitness import BitString, FitnessSpec
from budgetlab.heuristics import AlgorithmSpec
from budgetlab.oracle import (ChainModel, aggregate_full_to_level,
                              build_full_chain, build_level_chain,
                              delta_summary, exact_error_curve,
                              exact_expected_error, is_supermartingale,
                              theorem_battery, verify_sandwich,
                              verify_uniform_suffix)
from budgetlab.simulate import InitSpec


def test_full_chain_caps():
    with pytest.raises(ValueError):
        build_full_chain(AlgorithmSpec.rls(), FitnessSpec.onemax(13))
    with pytest.raises(ValueError):
        build_full_chain(AlgorithmSpec.sa(), FitnessSpec.onemax(1))


def test_level_chain_rejects_asymmetric_functions():
    with pytest.raises(ValueError):
        build_level_chain(AlgorithmSpec.rls(), FitnessSpec.leadingones(8))
    with pytest.raises(ValueError):
        build_level_chain(AlgorithmSpec.rls(), FitnessSpec.binval(8))
    with pytest.raises(ValueError):
        build_level_chain(AlgorithmSpec.rls(), FitnessSpec.onemax(201))


def test_rls_onemax_rows():
    ch = build_full_chain(AlgorithmSpec.rls(), FitnessSpec.onemax(2))
    i = ch.state_labels.index("10")
    row = {lbl: ch.P[i, j] for j, lbl in enumerate(ch.state_labels) if ch.P[i, j]}
    assert row == {"11": 0.5, "10": 0.5}
    opt = ch.state_labels.index("11")
    assert ch.P[opt, opt] == 1.0


def test_ea_onemax_row_with_tie_acceptance():
    # four masks at p = 1/2, ties accepted: 10 -> {11: 1/4, 01: 1/4, 10: 1/2}
    ch = build_full_chain(AlgorithmSpec.ea(0.5), FitnessSpec.onemax(2))
    i = ch.state_labels.index("10")
    row = {lbl: ch.P[i, j] for j, lbl in enumerate(ch.state_labels) if ch.P[i, j]}
    assert row == {"11": 0.25, "01": 0.25, "10": 0.5}


def test_sa_zigzag_row_metropolis():
    T = 0.7
    ch = build_full_chain(AlgorithmSpec.sa(T), FitnessSpec.zigzag(4))
    i = ch.state_labels.index("1100")  # level 2, even, f = 2
    j = ch.state_labels.index("0000")  # two ones flipped: f = 0, df = -2
    assert math.isclose(ch.P[i, j], 0.5 / 6 * math.exp(-2 / T), rel_tol=1e-12)
    j2 = ch.state_labels.index("1111")  # two zeros flipped: improvement
    assert math.isclose(ch.P[i, j2], 0.5 / 6, rel_tol=1e-12)
    opt = ch.state_labels.index("1111")
    assert ch.P[opt, opt] == 1.0


def test_level_chain_rls_onemax_rows():
    ch = build_level_chain(AlgorithmSpec.rls(), FitnessSpec.onemax(10))
    for i in range(10):
        assert math.isclose(ch.P[i, i + 1], (10 - i) / 10, rel_tol=1e-15)
        assert math.isclose(ch.P[i, i], i / 10, rel_tol=1e-15)
    assert ch.P[10, 10] == 1.0


@pytest.mark.parametrize("kind", ["onemax", "zigzag"])
@pytest.mark.parametrize("algo", [AlgorithmSpec.rls(), AlgorithmSpec.ea(),
                                  AlgorithmSpec.sa()])
def test_level_chain_equals_aggregated_full_chain(kind, algo):
    spec = FitnessSpec(kind, 6)
    full = build_full_chain(algo, spec)
    lvl = build_level_chain(algo, spec)
    Pagg, eagg = aggregate_full_to_level(full)
    assert np.max(np.abs(Pagg - lvl.P)) < 1e-12
    assert np.max(np.abs(eagg - lvl.err)) < 1e-12
    # and identical exact curves
    c1 = exact_error_curve(full, 80)
    c2 = exact_error_curve(lvl, 80)
    assert np.max(np.abs(c1 - c2)) <= 1e-12 * max(c1[0], 1.0)


def test_exact_expected_error_t0_and_monotone():
    ch = build_full_chain(AlgorithmSpec.ea(), FitnessSpec.leadingones(6))
    assert exact_expected_error(ch, 0) == float(ch.init @ ch.err)
    curve = exact_error_curve(ch, 400)
    assert np.all(np.diff(curve) <= 1e-15)


def test_rls_linear_deltas_are_exactly_one_over_n():
    rng = np.random.default_rng(2)
    spec = FitnessSpec.linear(rng.uniform(0.05, 1.0, 5))
    ds = delta_summary(build_full_chain(AlgorithmSpec.rls(), spec))
    assert abs(ds.delta_min - 0.2) < 1e-12
    assert abs(ds.delta_max - 0.2) < 1e-12


def test_ea_linear_delta_min_single_zero_state():
    ds = delta_summary(build_full_chain(AlgorithmSpec.ea(0.25), FitnessSpec.onemax(4)))
    assert abs(ds.delta_min - 27 / 256) < 1e-15
    assert ds.argmin_state.count("1") == 3  # reached with one zero left


def test_two_state_chain_closed_form():
    # P[bad->good] = q: delta_min = q, two-step delta = 1-(1-q)^2, equality
    q = 0.3
    chain = ChainModel("level", FitnessSpec.onemax(1), AlgorithmSpec.rls(),
                       P=np.array([[1 - q, q], [0.0, 1.0]]),
                       err=np.array([1.0, 0.0]), init=np.array([1.0, 0.0]),
                       state_labels=["bad", "good"])
    chain.validate()
    ds = delta_summary(chain)
    assert math.isclose(ds.delta_min, q, rel_tol=1e-15)
    assert math.isclose(ds.delta2_min, 1 - (1 - q) ** 2, rel_tol=1e-15)
    assert math.isclose(1 - ds.delta2_min, (1 - ds.delta_min) ** 2, rel_tol=1e-15)


def test_delta_summary_requires_nonoptimal_state():
    chain = ChainModel("level", FitnessSpec.onemax(1), AlgorithmSpec.rls(),
                       P=np.array([[1.0]]), err=np.array([0.0]),
                       init=np.array([1.0]), state_labels=["opt"])
    with pytest.raises(ValueError):
        delta_summary(chain)


def test_sandwich_rls_linear_is_tight():
    rng = np.random.default_rng(4)
    spec = FitnessSpec.linear(rng.uniform(0.05, 1.0, 7))
    rep = verify_sandwich(build_full_chain(AlgorithmSpec.rls(), spec), 300)
    assert rep.ok
    # both envelopes coincide with the exact curve
    assert np.max(np.abs(rep.gap_upper)) <= 1e-10 * rep.e0
    assert np.max(np.abs(rep.gap_lower)) <= 1e-10 * rep.e0


def test_sandwich_ea_leadingones_and_sa_zigzag():
    rep = verify_sandwich(build_full_chain(AlgorithmSpec.ea(),
                                           FitnessSpec.leadingones(8)), 2000)
    assert rep.ok and rep.max_violation == 0.0
    rep = verify_sandwich(build_full_chain(AlgorithmSpec.sa(),
                                           FitnessSpec.zigzag(8)), 500)
    assert rep.ok


def test_ea_binval_between_closed_form_envelopes():
    n = 8
    ch = build_full_chain(AlgorithmSpec.ea(), FitnessSpec.binval(n))
    curve = exact_error_curve(ch, 500)
    t = np.arange(501)
    up = bounds.geometric_curve(curve[0], (1 / n) * (1 - 1 / n) ** (n - 1), t)
    lo = bounds.geometric_curve(curve[0], 1 / n, t)
    assert np.all(curve <= up * (1 + 1e-9))
    assert np.all(curve >= lo * (1 - 1e-9))


def test_sandwich_report_json_shape():
    rep = verify_sandwich(build_full_chain(AlgorithmSpec.rls(),
                                           FitnessSpec.onemax(4)), 50)
    doc = rep.to_json()
    for key in ("delta_min", "delta_max", "delta2_min", "delta2_max",
                "argmin_state", "argmax_state", "violations", "gap_upper"):
        assert key in doc


def test_uniform_suffix_exact():
    rep = verify_uniform_suffix(6, 300)
    assert rep.ok
    assert rep.max_deviation < 1e-12
    # prefix structure: conditioned on prefix length i, bit i+1 is zero
    ch = build_full_chain(AlgorithmSpec.ea(), FitnessSpec.leadingones(4))
    for s, lbl in enumerate(ch.state_labels):
        lead = len(lbl) - len(lbl.lstrip("1"))
        if lead < 4:
            assert lbl[lead] == "0"


def test_uniform_suffix_needs_accept_on_ties():
    # rejecting equal-fitness offspring would freeze the suffix; the
    # documented kernel accepts ties, so suffix bits keep flipping
    ch = build_full_chain(AlgorithmSpec.ea(), FitnessSpec.leadingones(3))
    i = ch.state_labels.index("100")
    j = ch.state_labels.index("101")  # suffix flip, fitness tie
    assert ch.P[i, j] > 0


def test_supermartingale_flags():
    # annealing at the default temperature: zigzag holds, onemax fails for
    # n >= 6 (rate-1/n Metropolis down-moves beat the improvement rate)
    assert is_supermartingale(build_full_chain(AlgorithmSpec.sa(), FitnessSpec.zigzag(8)))
    assert is_supermartingale(build_full_chain(AlgorithmSpec.sa(), FitnessSpec.binval(8)))
    assert is_supermartingale(build_full_chain(AlgorithmSpec.sa(), FitnessSpec.leadingones(8)))
    assert not is_supermartingale(build_full_chain(AlgorithmSpec.sa(), FitnessSpec.onemax(8)))
    cold = AlgorithmSpec.sa(1 / (2 * math.log(8)))
    assert is_supermartingale(build_full_chain(cold, FitnessSpec.onemax(8)))


def test_theorem_battery_small():
    rep = theorem_battery(ns=(4, 5), horizon=60)
    assert rep.ok
    assert len(rep.results) == 2 * 4 * 3
    doc = rep.to_json()
    assert doc["ok"] and len(doc["chains"]) == 24


def test_chain_validation_catches_bad_rows():
    chain = build_full_chain(AlgorithmSpec.rls(), FitnessSpec.onemax(3))
    chain.P[0, 0] += 1e-6
    with pytest.raises(AssertionError):
        chain.validate()

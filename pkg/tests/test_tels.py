import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from surgekit import gf2
from surgekit.errors import BudgetInfeasible, InvalidCode, InvalidInput, NotParallelizable
from surgekit.pauli import PauliOperator
from surgekit.tels import (G_322, G_844, MeasurementCode, TimelikeModel, best_family,
                           build_measurement_set, catalog, code_distance, concatenate,
                           detection_probability, extended_hamming, family_code,
                           identity_code, is_undetected, parity_code, plan_error_correction,
                           plan_tels, plan_unencoded, product_code, same_group, shorten,
                           simulate_tels, span_weights, sweep_families,
                           undetected_probability, weight_enumerator)

DELTA = 1e-15


@pytest.fixture(scope="module")
def model():
    return TimelikeModel()


def brute_weights(g):
    """Weight histogram by listing every message vector."""
    g = np.asarray(g, int)
    k, n = g.shape
    hist = [0] * (n + 1)
    for msg in itertools.product((0, 1), repeat=k):
        hist[int(((np.array(msg) @ g) % 2).sum())] += 1
    return hist


def random_full_rank(rng, k, n):
    while True:
        g = rng.integers(0, 2, (k, n), dtype=np.uint8)
        if gf2.rank(g) == k:
            return g


@pytest.mark.parametrize("g, d", [
    (G_322, 2),
    (G_844, 4),
    (np.eye(5, dtype=np.uint8), 1),
    (np.ones((1, 7), np.uint8), 7),
])
def test_code_distance_examples(g, d):
    assert code_distance(g) == d
    assert MeasurementCode(g).d == d


def test_rank_deficient_rejected():
    g = np.array([[1, 1, 0], [1, 1, 0]], np.uint8)
    with pytest.raises(InvalidCode):
        code_distance(g)
    with pytest.raises(InvalidCode):
        MeasurementCode(g)
    with pytest.raises(InvalidCode):
        MeasurementCode(np.eye(3, 2, dtype=np.uint8))


@pytest.mark.parametrize("seed", range(8))
def test_weights_match_brute_force(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 7))
    n = int(rng.integers(k, 13))
    g = random_full_rank(rng, k, n)
    assert span_weights(g) == brute_weights(g)
    assert weight_enumerator(g) == brute_weights(g)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_macwilliams_branch(seed):
    # k > n - k and k > 12 forces the dual route
    rng = np.random.default_rng(seed)
    n = int(rng.integers(14, 18))
    k = int(rng.integers(13, n))
    g = random_full_rank(rng, k, n)
    we = weight_enumerator(g)
    assert we == span_weights(g)
    assert sum(we) == 2 ** k


def test_hamming_16_enumerator():
    # the [16,11,4] extended Hamming code: A_4 = 140, A_6 = 448, A_8 = 870
    we = extended_hamming(4).weight_enumerator
    assert we[:5] == [1, 0, 0, 0, 140]
    assert we[6] == 448 and we[8] == 870 and we[16] == 1
    assert all(we[w] == 0 for w in range(1, 16, 2))


@pytest.mark.parametrize("e, undetected", [
    ([0, 0, 0], True),
    ([1, 0, 1], True),
    ([1, 1, 0], True),
    ([1, 0, 0], False),
    ([1, 1, 1], False),
])
def test_is_undetected_322(e, undetected):
    assert is_undetected(e, MeasurementCode(G_322)) is undetected
    assert is_undetected(e, G_322) is undetected


def test_is_undetected_bad_length():
    with pytest.raises(InvalidInput):
        is_undetected([1, 0], MeasurementCode(G_322))


@pytest.mark.parametrize("code", catalog(), ids=repr)
def test_low_weight_errors_detected(code):
    assert code.n <= 16
    for w in range(1, code.d):
        for sup in itertools.combinations(range(code.n), w):
            e = np.zeros(code.n, np.uint8)
            e[list(sup)] = 1
            assert not is_undetected(e, code)
    # a minimum weight codeword is invisible
    word = next(c for c in (np.array(m) @ code.G % 2 for m in itertools.product((0, 1), repeat=code.k))
                if c.sum() == code.d)
    assert is_undetected(word, code)


@pytest.mark.parametrize("code, params", [
    (parity_code(5), (6, 5, 2)),
    (concatenate(parity_code(2)), (9, 4, 4)),
    (product_code(2, 3), (12, 6, 4)),
    (extended_hamming(3), (8, 4, 4)),
    (extended_hamming(4), (16, 11, 4)),
    (identity_code(4), (4, 4, 1)),
])
def test_family_parameters(code, params):
    assert code.params == params


@pytest.mark.parametrize("k", [5, 9, 13])
@pytest.mark.parametrize("family", ["hamming", "concat2", "product"])
def test_shortened_members(family, k):
    code = family_code(family, k, shortened=True)
    assert code.k == k
    assert code.d >= 4
    assert code.G.any(axis=0).all()


def test_shorten_keeps_distance():
    big = extended_hamming(4)
    for k in range(1, 12):
        assert shorten(big, k).d >= big.d
    with pytest.raises(InvalidCode):
        shorten(big, 12)


def test_family_code_absent():
    assert family_code("hamming", 9) is None
    assert family_code("product", 7) is None
    with pytest.raises(InvalidInput):
        family_code("golay", 3)


def P(s):
    return PauliOperator.from_string(s)


def test_measurement_set_844():
    ps = [P(s) for s in ("XXII", "ZZII", "IIXX", "IIZZ")]
    qs = build_measurement_set(ps, MeasurementCode(G_844))
    assert len(qs) == 8
    # column 1 of G_844 is (0,1,1,1): ZZII * IIXX * IIZZ
    assert list(qs[0].u_bits) == [0, 0, 1, 1] and list(qs[0].v_bits) == [1, 1, 1, 1]
    assert same_group(ps, qs)


def test_measurement_set_322_products():
    ps = [P("XX"), P("ZZ")]
    qs = build_measurement_set(ps, G_322)
    assert [list(q.u_bits) for q in qs] == [[1, 1], [0, 0], [1, 1]]
    assert [list(q.v_bits) for q in qs] == [[0, 0], [1, 1], [1, 1]]


def test_measurement_set_rejects():
    with pytest.raises(NotParallelizable):
        build_measurement_set([P("X"), P("Z")], G_322)
    with pytest.raises(InvalidInput):
        build_measurement_set([P("X")], G_322)


@pytest.mark.parametrize("code", catalog(), ids=repr)
def test_measurement_group_preserved(code, rng):
    # k commuting Paulis: independent Z strings conjugated by a random X pattern
    n = code.k + 2
    ps = []
    for i in range(code.k):
        v = np.zeros(n, np.uint8)
        v[i] = 1
        v[n - 1] = rng.integers(0, 2)
        ps.append(PauliOperator.from_bits(np.zeros(n, np.uint8), v))
    qs = build_measurement_set(ps, code)
    assert same_group(ps, qs)
    if code.k > 1:
        assert not same_group(ps, ps[:-1])


def test_same_group_negative():
    assert not same_group([P("XI")], [P("ZI")])
    assert same_group([P("XI"), P("IX")], [P("XX"), P("IX")])


def test_unencoded_k11(model):
    plan = plan_unencoded(11, model, DELTA)
    assert plan.d_m == 18
    assert plan.runtime == 11 * 19
    assert plan.p_detect == 0


def test_hamming_k11_ratio(model):
    plan = plan_tels(extended_hamming(4), model, DELTA)
    base = plan_unencoded(11, model, DELTA)
    assert plan.d_m == 5
    assert plan.runtime / base.runtime == pytest.approx(0.46, abs=0.03)
    assert plan.failure <= plan.budget
    assert plan.magic_states_held == 11


def test_error_correction_mode_slower(model):
    code = extended_hamming(4)
    ec = plan_error_correction(code, model, DELTA)
    det = plan_tels(code, model, DELTA)
    assert ec.mode == "correct"
    assert ec.runtime == code.n * (ec.d_m + 1)
    assert ec.runtime > det.runtime


def test_dm_non_increasing_in_distance(model):
    k = 16
    codes = [identity_code(k), parity_code(k), concatenate(parity_code(4))]
    dms = [plan_tels(c, model, DELTA).d_m for c in codes]
    assert [c.d for c in codes] == [1, 2, 4]
    assert dms == sorted(dms, reverse=True)


def test_undetected_modes(model):
    code = extended_hamming(4)
    Pf = 1e-4
    lead = undetected_probability(code, Pf, "leading")
    full = undetected_probability(code, Pf, "full")
    exact = undetected_probability(code, Pf, "exact")
    assert lead == pytest.approx(140 * Pf ** 4)
    assert exact < full and lead < full
    assert undetected_probability(code, Pf) == full
    with pytest.raises(InvalidInput):
        undetected_probability(code, Pf, "median")
    # any-error probability splits into detected plus undetected
    assert detection_probability(code, Pf) + exact == pytest.approx(1 - (1 - Pf) ** 16)


def test_model_rejects_threshold():
    with pytest.raises(BudgetInfeasible):
        TimelikeModel(p=0.05)


def test_sweep_crossover(model):
    rows = sweep_families(range(2, 15), model, DELTA)
    winners = {k: best_family(rows, k) for k in range(2, 15)}
    assert all(winners[k] == "parity" for k in (2, 3))
    dist4 = {"hamming", "concat2", "product"}
    assert sum(winners[k] in dist4 for k in range(9, 15)) >= 4
    for r in rows:
        assert r["family"] != "unencoded" or r["ratio"] == pytest.approx(1.0)


def test_large_k_asymptote(model):
    k = 100
    for fam in ("parity", "concat2"):
        code = family_code(fam, k)
        plan = plan_tels(code, model, DELTA, k=k)
        # the remeasure term is a small correction to (n/k)(d_m+1)
        lead = code.n / k * (plan.d_m + 1)
        assert lead <= plan.runtime_per_pauli < 1.01 * lead


def test_plan_infeasible(model):
    with pytest.raises(BudgetInfeasible):
        plan_tels(identity_code(3), model, 1e-300, max_dm=20)


def test_simulate_zero_noise(rng):
    m = TimelikeModel(A=0.0)
    plan = plan_tels(parity_code(4), m, DELTA)
    out = simulate_tels(plan, 1000, rng, m)
    assert out["failures"] == 0 and out["detections"] == 0
    assert out["mean_runtime"] == 5 * (plan.d_m + 1)


def test_simulate_322_rates(rng):
    code = MeasurementCode(G_322)
    plan = plan_tels(code, TimelikeModel(), DELTA)
    plan.p_fail = 0.1
    trials = 20000
    out = simulate_tels(plan, trials, rng)
    # detection iff the error pattern is not a codeword: weights 1 and 3
    p_det = 3 * 0.1 * 0.9 ** 2 + 0.1 ** 3
    p_und = 3 * 0.1 ** 2 * 0.9
    for key, p in (("detect_rate", p_det), ("failure_rate", p_und)):
        assert abs(out[key] - p) < 3 * math.sqrt(p * (1 - p) / trials)

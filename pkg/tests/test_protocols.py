import numpy as np
import pytest

from surgekit.clifford import Clifford, random_clifford
from surgekit.errors import CacheAccessViolation, InvalidInput
from surgekit.pauli import PauliOperator, decompose
from surgekit.protocols import (CacheMachine, measure_pauli, pbc_outputs, simulate_rfc,
                                simulate_wtc, swap_via_cache, twist_free_branches,
                                twist_free_measure, verify_cache_swap, verify_pbc_equivalence,
                                verify_twist_free)
from surgekit.statevector import PLUS, ZERO, DenseState, fidelity
from surgekit.tableau import Tableau, random_stabilizer_state


@pytest.fixture
def bell():
    return DenseState(2, np.array([1, 0, 0, 1], complex) / np.sqrt(2))


def test_measure_z_on_zero(rng):
    b, post = measure_pauli(DenseState.zero(1), decompose("Z"), rng)
    assert b == 0
    assert fidelity(post, DenseState.zero(1)) == pytest.approx(1)


def test_measure_x_on_zero_is_uniform(rng):
    outs = [measure_pauli(DenseState.zero(1), decompose("X"), rng)[0] for _ in range(4000)]
    assert abs(np.mean(outs) - 0.5) < 4 * 0.5 / np.sqrt(4000)


def test_measure_yy_on_bell(rng, bell):
    for _ in range(20):
        assert measure_pauli(bell, decompose("YY"), rng)[0] == 1


def test_non_hermitian_rejected(rng):
    with pytest.raises(InvalidInput):
        measure_pauli(DenseState.zero(1), PauliOperator(1, 0, 1, 1), rng)  # iX


def test_twist_free_zz(rng):
    res = twist_free_measure(DenseState.zero(2), decompose("ZZ"), rng)
    assert res.outcome == 0
    assert fidelity(res.state, DenseState.zero(2)) == pytest.approx(1)


def test_twist_free_yy_on_bell(rng, bell):
    for _ in range(20):
        res = twist_free_measure(bell, decompose("YY"), rng)
        assert res.outcome == 1
        assert fidelity(res.state, bell) == pytest.approx(1, abs=1e-12)


def test_twist_free_exposes_only_combined_bit(rng):
    res = twist_free_measure(DenseState.zero(2), decompose("XY"), rng)
    assert not hasattr(res, "m_x") and not hasattr(res, "m_z")
    assert res.ancillas == ("A", "Y")


def test_single_y_sampled(rng):
    """Sampled outcome frequencies of the odd-Y case against the direct Born rule."""
    psi = DenseState.random(1, rng)
    p = decompose("Y")
    p1 = psi.outcome_probability(p, 1)
    n = 10_000
    ones = sum(twist_free_measure(psi, p, rng).outcome for _ in range(n))
    assert abs(ones - n * p1) < 3 * np.sqrt(n * p1 * (1 - p1))


@pytest.mark.parametrize("s", ["Y", "YY", "XY", "YXZ", "YYY", "-YZ", "XZ", "ZIZ"])
def test_branches_match_direct_measurement(s, rng):
    p = decompose(s)
    for _ in range(10):
        psi = DenseState.random(p.n, rng)
        tot = {0: 0.0, 1: 0.0}
        for pr, res in twist_free_branches(psi, p):
            tot[res.outcome] += pr
            if pr > 1e-12:
                _, ref = measure_pauli(psi, p, None, forced=res.outcome)
                assert fidelity(ref, res.state) > 1 - 1e-10
        for b in (0, 1):
            assert tot[b] == pytest.approx(psi.outcome_probability(p, b), abs=1e-12)


def test_frame_correction_recorded(rng):
    p = decompose("YY")
    seen = set()
    for _ in range(40):
        res = twist_free_measure(DenseState.random(2, rng), p, rng)
        seen.add(res.frame_correction is None)
        if res.frame_correction is not None:
            assert res.frame_correction == decompose("ZZ")
    assert seen == {True, False}


@pytest.mark.parametrize("s", ["XZ", "YY", "YXZ"])
def test_verify_twist_free(s):
    rep = verify_twist_free(s, num_stabilizer_trials=200, num_dense_trials=20, rng=7)
    assert rep.passed
    assert rep.min_fidelity >= 1 - 1e-10


def test_tableau_twist_free_xz_exact(rng):
    p = decompose("XZ")
    for _ in range(50):
        t = random_stabilizer_state(2, rng)
        res = twist_free_measure(t, p, rng)
        ref = t.copy()
        ref.measure_pauli(p, rng, forced=res.outcome)
        assert ref.same_state(res.state)


def test_tableau_agrees_with_dense(rng):
    for n in (2, 5, 8):
        c = random_clifford(n, rng)
        t = Tableau.zero(n).apply_gates(c.gates)
        psi = DenseState.zero(n).apply_gates(c.gates)
        for stab in t.stabilizers():
            assert psi.expectation(stab) == pytest.approx(1, abs=1e-9)


def test_pbc_zero_input(rng):
    out, _, _ = pbc_outputs(DenseState.zero(2), Clifford.identity(2), rng)
    for key in "abcd":
        assert fidelity(out[key], DenseState.zero(2)) == pytest.approx(1)


def test_pbc_plus_plus():
    rep = verify_pbc_equivalence(rng=3, trials=100, input_state=DenseState.from_single([PLUS, PLUS]))
    assert rep.passed and rep.details["frame_check"]


def test_pbc_random():
    rep = verify_pbc_equivalence(rng=4, trials=50)
    assert rep.passed


def test_cache_swap_trivial_frame():
    rep = verify_cache_swap(rng=5, trials=10, trivial_frame=True)
    assert rep.passed and rep.min_fidelity == pytest.approx(1)
    assert rep.details["multi_qubit_measurements"] == [3]


def test_cache_swap_random_frames():
    assert verify_cache_swap(rng=6, trials=10).passed


def test_wtc_of_plus(rng):
    state = DenseState.from_single([PLUS, ZERO, ZERO])
    m = CacheMachine(state, (0, 1), (2,), Clifford.identity(3))
    out = simulate_wtc(m, 0, 2, rng)
    want = DenseState.from_single([ZERO, ZERO, PLUS])
    assert fidelity(out.logical_state(), want) == pytest.approx(1)
    back = simulate_rfc(out, 2, 0, rng)
    assert fidelity(back.logical_state(), state) == pytest.approx(1)


def test_cache_z_is_illegal(rng):
    m = CacheMachine(DenseState.zero(3), (0, 1), (2,), Clifford.identity(3))
    with pytest.raises(CacheAccessViolation):
        m.measure(decompose("ZIZ"), rng)
    m.measure(decompose("XIX"), rng)


def test_swap_requires_roles(rng):
    m = CacheMachine(DenseState.zero(3), (0, 1), (2,), Clifford.identity(3))
    with pytest.raises(InvalidInput):
        swap_via_cache(m, 2, 0, 1, rng)

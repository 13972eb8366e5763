"""Logical-level protocol simulations: twist-free Y measurement, the
equivalent ways of applying two T gates in Pauli-based computation, and the
write-to-cache / read-from-cache teleportations.

All routines accept either a :class:`DenseState` or a :class:`Tableau` where
the protocol is Clifford, and never mutate their inputs.
"""
from dataclasses import dataclass, field

import numpy as np

from .clifford import Clifford
from .errors import CacheAccessViolation, InvalidInput
from .pauli import PauliOperator, c_constant, decompose
from .statevector import ONE, PLUS, MINUS, T_STATE, Y_PLUS, ZERO, DenseState, fidelity
from .tableau import Tableau, random_stabilizer_state


def measure_pauli(state, p: PauliOperator, rng, forced=None):
    """Projective measurement; returns (outcome, post_state) on a copy."""
    if not p.is_hermitian:
        raise InvalidInput("measured operator must be Hermitian")
    post = state.copy()
    b = post.measure_pauli(p, rng, forced=forced)
    return b, post


# ---------------------------------------------------------------------------
# twist-free measurement


@dataclass
class TwistFreeResult:
    outcome: int
    state: object
    ancillas: tuple
    frame_correction: PauliOperator | None
    measurements: int = 2


def _extend(state, odd: bool):
    """Append (optional |Y>) and the |0> ancilla A; returns (state, y_idx, a_idx)."""
    n = state.n
    k = 2 if odd else 1
    if isinstance(state, DenseState):
        vecs = ([Y_PLUS] if odd else []) + [ZERO]
        ext = state.tensor(DenseState.from_single(vecs))
    else:
        ext = state.append_qubits(k)
        if odd:
            ext.h(n)
            ext.s(n)
    return ext, (n if odd else None), n + k - 1


def _twist_free_steps(state, p: PauliOperator, rng, forced=(None, None, None)):
    if not p.is_hermitian:
        raise InvalidInput("measured operator must be Hermitian")
    if p.n != state.n:
        raise InvalidInput("operator size does not match state")
    t = p.y_count
    odd = t % 2 == 1
    ext, y_idx, a = _extend(state, odd)
    big = ext.n
    u, v = p.u, p.v
    if odd:
        u |= 1 << y_idx
        v |= 1 << y_idx
    mx_op = PauliOperator(u | (1 << a), 0, big)
    mz_op = PauliOperator(1 << a, v, big)
    prob = 1.0
    dense = isinstance(ext, DenseState)
    if dense and forced[0] is not None:
        prob *= ext.outcome_probability(mx_op, forced[0])
    m_x = ext.measure_pauli(mx_op, rng, forced=forced[0])
    if dense and forced[1] is not None:
        prob *= ext.outcome_probability(mz_op, forced[1])
    m_z = ext.measure_pauli(mz_op, rng, forced=forced[1])
    za = PauliOperator(0, 1 << a, big)
    if dense and forced[2] is not None:
        prob *= ext.outcome_probability(za, forced[2])
    q = ext.measure_pauli(za, rng, forced=forced[2])
    correction = None
    if q:
        ext.apply_pauli(PauliOperator(0, v, big))
        ext.apply_pauli(PauliOperator(1 << a, 0, big))
        correction = PauliOperator(0, p.v, p.n)
    # the stored sign of P flips the reported bit
    outcome = m_x ^ m_z ^ c_constant(p.u, p.v) ^ (p.phase // 2)
    drop = [a] + ([y_idx] if odd else [])
    if dense:
        post = ext.drop_qubits(drop, [ZERO] + ([Y_PLUS] if odd else []))
    else:
        post = ext.drop_qubits(drop)
    anc = ("A", "Y") if odd else ("A",)
    return TwistFreeResult(outcome, post, anc, correction), prob


def twist_free_measure(state, p: PauliOperator, rng) -> TwistFreeResult:
    """Measure ``p`` using only X-type and Z-type products plus ancillas.

    Only the combined bit m_x ^ m_z ^ c is reported.  Paulis with an odd
    number of Y factors borrow an ideal |Y> resource state.
    """
    return _twist_free_steps(state, p, rng)[0]


def twist_free_branches(state: DenseState, p: PauliOperator):
    """Every measurement branch with its exact probability (dense only)."""
    out = []
    for mx in (0, 1):
        for mz in (0, 1):
            for q in (0, 1):
                try:
                    res, pr = _twist_free_steps(state, p, None, forced=(mx, mz, q))
                except InvalidInput:
                    continue  # zero-probability branch
                out.append((pr, res))
    return out


@dataclass
class VerificationReport:
    protocol: str
    trials: int
    max_deviation: float
    min_fidelity: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "protocol": self.protocol,
            "trials": self.trials,
            "max_deviation": self.max_deviation,
            "min_fidelity": self.min_fidelity,
            "pass": self.passed,
        }
        out.update(self.details)
        return out


def _tableau_fidelity(a: Tableau, b: Tableau) -> float:
    return 1.0 if a.same_state(b) else 0.0


def verify_twist_free(p, num_stabilizer_trials=1000, num_dense_trials=100, rng=None, tol=1e-10):
    """Compare the twist-free protocol against a direct measurement of ``p``.

    Dense trials enumerate every internal branch exactly; stabilizer trials
    sample the protocol and compare the post-state with the oracle measurement
    forced to the same outcome.
    """
    if isinstance(p, str):
        p = decompose(p)
    rng = np.random.default_rng(rng)
    n = p.n
    max_dev = 0.0
    min_fid = 1.0
    for _ in range(num_dense_trials):
        psi = DenseState.random(n, rng)
        tot = {0: 0.0, 1: 0.0}
        for pr, res in twist_free_branches(psi, p):
            tot[res.outcome] += pr
            if pr < 1e-12:
                continue
            _, ref = measure_pauli(psi, p, None, forced=res.outcome)
            min_fid = min(min_fid, fidelity(ref, res.state))
        for b in (0, 1):
            max_dev = max(max_dev, abs(tot[b] - psi.outcome_probability(p, b)))
    ones = 0
    expected = 0.0
    var = 0.0
    for _ in range(num_stabilizer_trials):
        t = random_stabilizer_state(n, rng)
        det = t.peek(p)
        p1 = 0.5 if det is None else float(det)
        res = twist_free_measure(t, p, rng)
        ones += res.outcome
        expected += p1
        var += p1 * (1 - p1)
        if det is not None and det != res.outcome:
            min_fid = 0.0
            continue
        _, ref = measure_pauli(t, p, rng, forced=res.outcome)
        min_fid = min(min_fid, _tableau_fidelity(ref, res.state))
    z = 0.0 if var == 0 else (ones - expected) / np.sqrt(var)
    if var == 0 and ones != expected:
        z = float("inf")
    passed = min_fid >= 1 - tol and max_dev <= tol and abs(z) <= 3.0
    return VerificationReport(
        "twist-free",
        num_stabilizer_trials + num_dense_trials,
        float(max_dev),
        float(min_fid),
        bool(passed),
        {"pauli": p.to_string(), "stabilizer_zscore": float(z)},
    )


# ---------------------------------------------------------------------------
# two T gates in Pauli-based computation

S_GATE = np.diag([1, 1j])


def _apply_s_power(state: DenseState, q: int, k: int):
    state.apply_1q(np.linalg.matrix_power(S_GATE, k % 4), q)


def pbc_outputs(psi: DenseState, frame: Clifford, rng):
    """Run the four two-T-gate circuits on the 2-qubit input ``psi``.

    Returns a dict of output states keyed 'a'..'d' plus the measurement
    record and the updated frame of circuit (d).  In (d) the physical register
    holds ``frame^-1 psi`` and the logical state is recovered by applying the
    returned frame.
    """
    if psi.n != 2:
        raise InvalidInput("expected a 2-qubit input")
    t = DenseState.from_single([T_STATE, T_STATE])
    out = {}
    a = psi.copy()
    a.apply_gates([("T", 0), ("T", 1)])
    out["a"] = a

    # (b) gate teleportation with CNOTs and Z measurements
    b = psi.tensor(t)
    b.apply_gates([("CX", 0, 2), ("CX", 1, 3)])
    m1 = b.measure_pauli(PauliOperator.single(4, 2, "Z"), rng)
    m2 = b.measure_pauli(PauliOperator.single(4, 3, "Z"), rng)
    _apply_s_power(b, 0, m1)
    _apply_s_power(b, 1, m2)
    out["b"] = b.drop_qubits([2, 3], [ONE if m1 else ZERO, ONE if m2 else ZERO])

    # (c) CNOTs replaced by ZZ and X measurements
    c = psi.tensor(t)
    m1 = c.measure_pauli(decompose("ZIZI"), rng)
    m2 = c.measure_pauli(decompose("IZIZ"), rng)
    q1 = c.measure_pauli(decompose("IIXI"), rng)
    q2 = c.measure_pauli(decompose("IIIX"), rng)
    _apply_s_power(c, 0, m1 + 2 * q1)
    _apply_s_power(c, 1, m2 + 2 * q2)
    out["c"] = c.drop_qubits([2, 3], [MINUS if q1 else PLUS, MINUS if q2 else PLUS])

    # (d) Pauli-based computation under a Clifford frame
    big = frame.embed(4, [0, 1])
    inv = big.inverse()
    phys = psi.copy().apply_gates(frame.inverse().gates).tensor(t)
    p1 = inv.conjugate(decompose("ZIZI"))
    p2 = inv.conjugate(decompose("IZIZ"))
    m1 = phys.measure_pauli(p1, rng)
    m2 = phys.measure_pauli(p2, rng)
    q1 = phys.measure_pauli(decompose("IIXI"), rng)
    q2 = phys.measure_pauli(decompose("IIIX"), rng)
    gates = [("S", 0)] * ((m1 + 2 * q1) % 4) + [("S", 1)] * ((m2 + 2 * q2) % 4)
    new_frame = frame.then(*gates)
    d = phys.drop_qubits([2, 3], [MINUS if q1 else PLUS, MINUS if q2 else PLUS])
    out["d_physical"] = d
    out["d"] = d.copy().apply_gates(new_frame.gates)
    record = {"m1": m1, "m2": m2, "q1": q1, "q2": q2, "P1": p1, "P2": p2}
    return out, record, new_frame


def verify_pbc_equivalence(rng=None, trials=100, tol=1e-10, input_state=None):
    from .clifford import random_clifford

    rng = np.random.default_rng(rng)
    min_fid = 1.0
    frame_ok = True
    for _ in range(trials):
        psi = input_state.copy() if input_state is not None else DenseState.random(2, rng)
        frame = random_clifford(2, rng)
        out, rec, new_frame = pbc_outputs(psi, frame, rng)
        for key in "bcd":
            min_fid = min(min_fid, fidelity(out["a"], out[key]))
        expect = Clifford(2, frame.gates).then(
            *([("S", 0)] * ((rec["m1"] + 2 * rec["q1"]) % 4) + [("S", 1)] * ((rec["m2"] + 2 * rec["q2"]) % 4))
        )
        frame_ok &= np.allclose(new_frame.to_matrix(), expect.to_matrix())
    passed = min_fid >= 1 - tol and frame_ok
    return VerificationReport("pbc", trials, float(1 - min_fid), float(min_fid), bool(passed),
                              {"frame_check": bool(frame_ok)})


# ---------------------------------------------------------------------------
# core / cache teleportation


@dataclass
class CacheMachine:
    """Physical register plus the software frame mapping it to the logical state.

    The logical state is ``frame`` applied to ``state``.  Cache qubits only
    ever pick up Pauli gates in the frame.
    """

    state: object
    core: tuple
    cache: tuple
    frame: Clifford
    multi_qubit_measurements: int = 0
    cache_measurements: int = 0

    def copy(self) -> "CacheMachine":
        return CacheMachine(self.state.copy(), self.core, self.cache, self.frame,
                            self.multi_qubit_measurements, self.cache_measurements)

    def logical_state(self):
        return self.state.copy().apply_gates(self.frame.gates)

    def check_legal(self, phys: PauliOperator):
        cache_mask = 0
        for q in self.cache:
            cache_mask |= 1 << q
        on_cache = (phys.u | phys.v) & cache_mask
        if not on_cache:
            return
        if phys.weight == 1:
            return  # single-qubit X or Z readout of a cache qubit is free
        if phys.v & cache_mask:
            raise CacheAccessViolation(f"cache support of {phys} is not X-type")

    def measure(self, logical_op: PauliOperator, rng) -> int:
        """Measure a logical Pauli through the frame, enforcing cache rules."""
        phys = self.frame.inverse().conjugate(logical_op)
        self.check_legal(phys)
        b = self.state.measure_pauli(phys, rng)
        cache_mask = sum(1 << q for q in self.cache)
        if phys.weight == 1 and (phys.u | phys.v) & cache_mask:
            self.cache_measurements += 1
        else:
            self.multi_qubit_measurements += 1
        return b

    def measure_physical(self, phys: PauliOperator, rng) -> int:
        self.check_legal(phys)
        self.multi_qubit_measurements += 1
        return self.state.measure_pauli(phys, rng)


def _op(n, qubit_labels):
    s = ["I"] * n
    for q, lab in qubit_labels.items():
        s[q] = lab
    return decompose("".join(s))


def simulate_wtc(machine: CacheMachine, j: int, i: int, rng) -> CacheMachine:
    """Teleport core qubit ``j`` into the |0> cache slot ``i``.

    Afterwards the logical core qubit ``j`` is reset to |0>.
    """
    if j not in machine.core or i not in machine.cache:
        raise InvalidInput("WTC needs a core qubit and a cache slot")
    m = machine.copy()
    n = m.state.n
    mxx = m.measure(_op(n, {j: "X", i: "X"}), rng)
    mz = m.measure(_op(n, {j: "Z"}), rng)
    fix = []
    if mz:
        fix += [("X", i), ("X", j)]
    if mxx:
        fix.append(("Z", i))
    m.frame = m.frame.then(*fix)
    return m


def simulate_rfc(machine: CacheMachine, k: int, j: int, rng) -> CacheMachine:
    """Teleport cache qubit ``k`` into the (logically |0>) core position ``j``.

    Afterwards the logical cache qubit ``k`` is |0>.
    """
    if j not in machine.core or k not in machine.cache:
        raise InvalidInput("RFC needs a cache qubit and a core position")
    m = machine.copy()
    n = m.state.n
    mxx = m.measure(_op(n, {j: "X", k: "X"}), rng)
    mz = m.measure(_op(n, {k: "Z"}), rng)
    fix = []
    if mz:
        fix += [("X", j), ("X", k)]
    if mxx:
        fix.append(("Z", j))
    m.frame = m.frame.then(*fix)
    return m


def swap_via_cache(machine: CacheMachine, j: int, k: int, i: int, rng) -> CacheMachine:
    """Exchange core qubit ``j`` with cache qubit ``k`` using empty slot ``i``."""
    return simulate_rfc(simulate_wtc(machine, j, i, rng), k, j, rng)


def verify_cache_swap(rng=None, trials=20, tol=1e-10, trivial_frame=False):
    """Random logical states and frames; check the swap permutes qubits."""
    from .clifford import random_clifford

    rng = np.random.default_rng(rng)
    min_fid = 1.0
    counts = set()
    for _ in range(trials):
        # core qubits 0,1 ; cache qubits 2 (occupied) and 3 (empty)
        psi3 = DenseState.random(3, rng)
        logical = psi3.tensor(DenseState.from_single([ZERO]))
        core_frame = Clifford.identity(2) if trivial_frame else random_clifford(2, rng)
        frame = core_frame.embed(4, [0, 1])
        phys = logical.copy().apply_gates(frame.inverse().gates)
        mach = CacheMachine(phys, (0, 1), (2, 3), frame)
        out = swap_via_cache(mach, 0, 2, 3, rng)
        counts.add(out.multi_qubit_measurements)
        got = out.logical_state().drop_qubits([2], [ZERO])
        # expected: qubit 0 <- old 2, qubit 1 unchanged, slot 3 <- old 0
        t = psi3.amps.reshape(2, 2, 2)
        want = DenseState(3, np.transpose(t, (2, 1, 0)).reshape(-1))
        min_fid = min(min_fid, fidelity(got, want))
    passed = min_fid >= 1 - tol
    return VerificationReport("cache-swap", trials, float(1 - min_fid), float(min_fid), bool(passed),
                              {"multi_qubit_measurements": sorted(counts)})

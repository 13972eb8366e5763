"""Dense statevector simulator for small registers (qubit 0 is the most
significant tensor factor, matching ``PauliOperator.to_matrix``)."""
import numpy as np

from .clifford import gate_matrix
from .errors import InvalidInput
from .pauli import PauliOperator

MAX_QUBITS = 12


def _parity(a: np.ndarray) -> np.ndarray:
    if hasattr(np, "bitwise_count"):
        return (np.bitwise_count(a) & 1).astype(np.int64)
    out = np.zeros_like(a)
    while np.any(a):
        out ^= a & 1
        a = a >> 1
    return out


class DenseState:
    def __init__(self, n: int, amps):
        if n > MAX_QUBITS:
            raise InvalidInput(f"dense simulation limited to {MAX_QUBITS} qubits")
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        if amps.size != 2 ** n:
            raise InvalidInput("amplitude vector has the wrong size")
        self.n = n
        self.amps = amps

    # construction ---------------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "DenseState":
        a = np.zeros(2 ** n, dtype=complex)
        a[0] = 1
        return cls(n, a)

    @classmethod
    def random(cls, n: int, rng) -> "DenseState":
        a = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
        return cls(n, a / np.linalg.norm(a))

    @classmethod
    def from_single(cls, vecs) -> "DenseState":
        out = np.array([1.0 + 0j])
        for v in vecs:
            out = np.kron(out, np.asarray(v, dtype=complex))
        return cls(len(vecs), out / np.linalg.norm(out))

    def copy(self) -> "DenseState":
        return DenseState(self.n, self.amps.copy())

    def tensor(self, other: "DenseState") -> "DenseState":
        return DenseState(self.n + other.n, np.kron(self.amps, other.amps))

    # helpers --------------------------------------------------------------
    def _mask(self, m: int) -> int:
        # bit j of a Pauli mask is qubit j, which is index bit n-1-j
        out = 0
        for j in range(self.n):
            if (m >> j) & 1:
                out |= 1 << (self.n - 1 - j)
        return out

    def pauli_apply(self, p: PauliOperator) -> np.ndarray:
        if p.n != self.n:
            raise InvalidInput("operator size does not match state")
        idx = np.arange(2 ** self.n)
        ux, vx = self._mask(p.u), self._mask(p.v)
        tgt = idx ^ ux
        out = np.empty_like(self.amps)
        signs = 1 - 2 * _parity(tgt & vx)
        out[tgt] = self.amps * signs
        return out * (1j ** ((p.phase + p.y_count) % 4))

    def expectation(self, p: PauliOperator) -> float:
        return float(np.real(np.vdot(self.amps, self.pauli_apply(p))))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    # dynamics ---------------------------------------------------------------
    def apply_pauli(self, p: PauliOperator):
        self.amps = self.pauli_apply(p)
        return self

    def apply_1q(self, u: np.ndarray, q: int):
        t = self.amps.reshape([2] * self.n)
        t = np.moveaxis(np.tensordot(u, t, axes=([1], [q])), 0, q)
        self.amps = t.reshape(-1)
        return self

    def apply_2q(self, u: np.ndarray, a: int, b: int):
        t = self.amps.reshape([2] * self.n)
        t = np.tensordot(u.reshape(2, 2, 2, 2), t, axes=([2, 3], [a, b]))
        t = np.moveaxis(t, [0, 1], [a, b])
        self.amps = t.reshape(-1)
        return self

    def apply_gate(self, gate):
        name, qs = gate[0], gate[1:]
        if name == "CX":
            u = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
            return self.apply_2q(u, *qs)
        if name == "CZ":
            return self.apply_2q(np.diag([1, 1, 1, -1]).astype(complex), *qs)
        return self.apply_1q(gate_matrix(name), qs[0])

    def apply_gates(self, gates):
        for g in gates:
            self.apply_gate(g)
        return self

    def measure_pauli(self, p: PauliOperator, rng, forced: int | None = None) -> int:
        """Projective measurement of Hermitian ``p``; returns the outcome bit."""
        if not p.is_hermitian:
            raise InvalidInput("measured operator must be Hermitian")
        pa = self.pauli_apply(p)
        ev = float(np.real(np.vdot(self.amps, pa)))
        p0 = min(max((1 + ev) / 2, 0.0), 1.0)
        if forced is None:
            b = 0 if rng.random() < p0 else 1
        else:
            b = int(forced)
        prob = p0 if b == 0 else 1 - p0
        if prob < 1e-14:
            raise InvalidInput("forced outcome has zero probability")
        self.amps = (self.amps + (1 - 2 * b) * pa) / 2
        self.amps /= np.sqrt(prob)
        return b

    def outcome_probability(self, p: PauliOperator, b: int) -> float:
        ev = self.expectation(p)
        return (1 + (1 - 2 * b) * ev) / 2

    def drop_qubits(self, qubits, vectors) -> "DenseState":
        """Remove ``qubits`` assumed to be in the product states ``vectors``."""
        order = sorted(zip(qubits, vectors), key=lambda t: -t[0])
        t = self.amps.reshape([2] * self.n)
        for q, vec in order:
            t = np.tensordot(np.conj(np.asarray(vec, dtype=complex)), t, axes=([0], [q]))
        out = t.reshape(-1)
        nrm = np.linalg.norm(out)
        if abs(nrm - 1) > 1e-8:
            raise InvalidInput("dropped qubits were not in the stated product state")
        return DenseState(self.n - len(qubits), out / nrm)


def fidelity(a: DenseState, b: DenseState) -> float:
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


ZERO = np.array([1, 0], dtype=complex)
ONE = np.array([0, 1], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)
Y_PLUS = np.array([1, 1j], dtype=complex) / np.sqrt(2)
T_STATE = np.array([1, np.exp(1j * np.pi / 4)], dtype=complex) / np.sqrt(2)

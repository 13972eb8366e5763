"""Clifford circuits as gate lists, with exact Pauli conjugation.

A gate is a tuple ``(name, *qubits)`` with name in H, S, SDG, CX, CZ, X, Y, Z.
``Clifford.conjugate(P)`` returns C P C^dagger, where C applies the gates in
list order (first gate acts first).
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput
from .pauli import PauliOperator, multiply

GATES_1Q = ("H", "S", "SDG", "X", "Y", "Z")
GATES_2Q = ("CX", "CZ")
_INVERSE = {"S": "SDG", "SDG": "S"}


def _x(n, q):
    return PauliOperator(1 << q, 0, n)


def _z(n, q):
    return PauliOperator(0, 1 << q, n)


def _y(n, q, sign=1):
    return PauliOperator(1 << q, 1 << q, n, 2 if sign > 0 else 0)


def _images(gate, n):
    """Images of X_q and Z_q for every qubit q the gate touches."""
    name, qs = gate[0], gate[1:]
    if name == "H":
        (q,) = qs
        return {("X", q): _z(n, q), ("Z", q): _x(n, q)}
    if name == "S":
        (q,) = qs
        return {("X", q): _y(n, q), ("Z", q): _z(n, q)}
    if name == "SDG":
        (q,) = qs
        return {("X", q): _y(n, q, -1), ("Z", q): _z(n, q)}
    if name in ("X", "Y", "Z"):
        (q,) = qs
        fx = -1 if name in ("Y", "Z") else 1
        fz = -1 if name in ("X", "Y") else 1
        xi, zi = _x(n, q), _z(n, q)
        return {("X", q): xi if fx > 0 else -xi, ("Z", q): zi if fz > 0 else -zi}
    if name == "CX":
        c, t = qs
        return {
            ("X", c): PauliOperator((1 << c) | (1 << t), 0, n),
            ("Z", c): _z(n, c),
            ("X", t): _x(n, t),
            ("Z", t): PauliOperator(0, (1 << c) | (1 << t), n),
        }
    if name == "CZ":
        a, b = qs
        return {
            ("X", a): PauliOperator(1 << a, 1 << b, n),
            ("Z", a): _z(n, a),
            ("X", b): PauliOperator(1 << b, 1 << a, n),
            ("Z", b): _z(n, b),
        }
    raise InvalidInput(f"unknown Clifford gate {name!r}")


def conjugate_by_gate(p: PauliOperator, gate) -> PauliOperator:
    qs = gate[1:]
    gm = 0
    for q in qs:
        gm |= 1 << q
    if not (p.u | p.v) & gm:
        return p
    img = _images(gate, p.n)
    ur, vr = p.u & ~gm, p.v & ~gm
    # i^{phase+t} Z[v]X[u] = i^{phase+t} (Z X on the rest)(Z X on the gate qubits)
    rest_phase = p.phase + p.y_count - bin(ur & vr).count("1")
    out = PauliOperator(ur, vr, p.n, rest_phase)
    for q in qs:
        if (p.v >> q) & 1:
            out = multiply(out, img[("Z", q)])
    for q in qs:
        if (p.u >> q) & 1:
            out = multiply(out, img[("X", q)])
    return out


def gate_matrix(name: str) -> np.ndarray:
    s2 = 1 / np.sqrt(2)
    table = {
        "H": np.array([[s2, s2], [s2, -s2]], dtype=complex),
        "S": np.diag([1, 1j]),
        "SDG": np.diag([1, -1j]),
        "T": np.diag([1, np.exp(1j * np.pi / 4)]),
        "TDG": np.diag([1, np.exp(-1j * np.pi / 4)]),
        "X": np.array([[0, 1], [1, 0]], dtype=complex),
        "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "Z": np.diag([1, -1]).astype(complex),
    }
    return table[name]


@dataclass(frozen=True)
class Clifford:
    n: int
    gates: tuple = ()

    def __post_init__(self):
        for g in self.gates:
            if g[0] not in GATES_1Q + GATES_2Q:
                raise InvalidInput(f"unknown Clifford gate {g[0]!r}")
            if any(q < 0 or q >= self.n for q in g[1:]):
                raise InvalidInput("gate qubit out of range")

    @classmethod
    def identity(cls, n: int) -> "Clifford":
        return cls(n, ())

    def then(self, *gates) -> "Clifford":
        return Clifford(self.n, self.gates + tuple(tuple(g) for g in gates))

    def compose(self, other: "Clifford") -> "Clifford":
        """Apply ``self`` first, then ``other``."""
        return Clifford(self.n, self.gates + other.gates)

    def inverse(self) -> "Clifford":
        inv = tuple((_INVERSE.get(g[0], g[0]),) + tuple(g[1:]) for g in reversed(self.gates))
        return Clifford(self.n, inv)

    def conjugate(self, p: PauliOperator) -> PauliOperator:
        """C P C^dagger."""
        if p.n != self.n:
            raise InvalidInput("operator size does not match Clifford")
        for g in self.gates:
            p = conjugate_by_gate(p, g)
        return p

    def embed(self, n: int, qubits) -> "Clifford":
        qubits = list(qubits)
        return Clifford(n, tuple((g[0],) + tuple(qubits[q] for q in g[1:]) for g in self.gates))

    def to_matrix(self) -> np.ndarray:
        from .statevector import DenseState

        dim = 2 ** self.n
        cols = []
        for k in range(dim):
            e = np.zeros(dim, dtype=complex)
            e[k] = 1
            st = DenseState(self.n, e)
            st.apply_gates(self.gates)
            cols.append(st.amps)
        return np.array(cols).T


def random_clifford(n: int, rng, depth: int | None = None) -> Clifford:
    """Random Clifford circuit; not Haar-uniform, but it mixes well for tests."""
    depth = depth if depth is not None else 4 * n + 4
    gates = []
    for _ in range(depth):
        for q in range(n):
            gates.append((("H", "S", "SDG", "X", "Z")[rng.integers(5)], q))
        if n > 1:
            perm = rng.permutation(n)
            for a, b in zip(perm[0::2], perm[1::2]):
                gates.append(("CX", int(a), int(b)))
    return Clifford(n, tuple((g[0],) + tuple(int(q) for q in g[1:]) for g in gates))

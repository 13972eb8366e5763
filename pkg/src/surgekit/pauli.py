"""Symplectic Pauli operators.

An operator on ``n`` qubits is stored as two packed bit masks ``u`` (X part)
and ``v`` (Z part) together with a phase exponent, using the convention

    P = i**phase * i**(u.v) * Z[v] X[u]

so that ``phase`` is 0 or 2 exactly when P is Hermitian.  Qubit ``j`` is bit
``j`` of each mask and the leftmost character of a Pauli string.
"""
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import InvalidInput

_LABEL = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_SIGN = {0: "+", 1: "+i", 2: "-", 3: "-i"}


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _pack(bits) -> int:
    out = 0
    for j, b in enumerate(bits):
        if int(b) & 1:
            out |= 1 << j
    return out


def _unpack(mask: int, n: int) -> np.ndarray:
    return np.array([(mask >> j) & 1 for j in range(n)], dtype=np.uint8)


def symplectic_product(u, v) -> int:
    """u.v as an integer; equals the number of Y factors of Z[v]X[u]."""
    if isinstance(u, int) and isinstance(v, int):
        return _popcount(u & v)
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    if u.shape != v.shape:
        raise InvalidInput("bit vectors differ in length")
    return int(np.sum(u & v))


def c_constant(u, v) -> int:
    """Correction bit reported alongside m_x xor m_z in twist-free measurement."""
    if not isinstance(u, int) and len(u) != len(v):
        raise InvalidInput("bit vectors differ in length")
    return 0 if symplectic_product(u, v) % 4 in (0, 1) else 1


@dataclass(frozen=True)
class PauliOperator:
    u: int
    v: int
    n: int
    phase: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInput("a Pauli needs at least one qubit")
        if self.u >> self.n or self.v >> self.n or self.u < 0 or self.v < 0:
            raise InvalidInput("bit mask exceeds operator length")
        object.__setattr__(self, "phase", self.phase % 4)

    # construction -------------------------------------------------------
    @classmethod
    def from_bits(cls, u, v, phase: int = 0) -> "PauliOperator":
        if len(u) != len(v):
            raise InvalidInput("bit vectors differ in length")
        return cls(_pack(u), _pack(v), len(u), phase)

    @classmethod
    def from_string(cls, s: str) -> "PauliOperator":
        return decompose(s)

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(0, 0, n, 0)

    @classmethod
    def single(cls, n: int, qubit: int, label: str) -> "PauliOperator":
        s = ["I"] * n
        s[qubit] = label
        return decompose("".join(s))

    # views ----------------------------------------------------------------
    @property
    def u_bits(self) -> np.ndarray:
        return _unpack(self.u, self.n)

    @property
    def v_bits(self) -> np.ndarray:
        return _unpack(self.v, self.n)

    @property
    def y_count(self) -> int:
        return _popcount(self.u & self.v)

    @property
    def c(self) -> int:
        return c_constant(self.u, self.v)

    @property
    def is_hermitian(self) -> bool:
        return self.phase in (0, 2)

    @property
    def sign(self) -> int:
        """Overall sign relative to the plain label string (Hermitian only)."""
        s = (self.phase + 2 * self.y_count) % 4
        if s % 2:
            raise InvalidInput("operator is not Hermitian")
        return 1 if s == 0 else -1

    @property
    def support(self) -> list:
        m = self.u | self.v
        return [j for j in range(self.n) if (m >> j) & 1]

    @property
    def weight(self) -> int:
        return _popcount(self.u | self.v)

    def labels(self) -> str:
        return "".join(_LABEL[((self.u >> j) & 1, (self.v >> j) & 1)] for j in range(self.n))

    def to_string(self) -> str:
        # Z[v]X[u] carries a factor i per Y site relative to the label string
        return _SIGN[(self.phase + 2 * self.y_count) % 4] + self.labels()

    def __str__(self) -> str:
        return self.to_string()

    def with_sign(self, sign: int) -> "PauliOperator":
        base = (-2 * self.y_count) % 4
        return PauliOperator(self.u, self.v, self.n, base + (0 if sign > 0 else 2))

    def __neg__(self) -> "PauliOperator":
        return PauliOperator(self.u, self.v, self.n, self.phase + 2)

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return multiply(self, other)

    def restrict(self, qubits) -> "PauliOperator":
        """Tensor factor on ``qubits`` (in the given order), sign dropped."""
        u = _pack([(self.u >> q) & 1 for q in qubits])
        v = _pack([(self.v >> q) & 1 for q in qubits])
        return PauliOperator(u, v, len(qubits), -2 * _popcount(u & v) + 0)

    def embed(self, n: int, qubits) -> "PauliOperator":
        """Place this operator on ``qubits`` of an ``n``-qubit register."""
        if len(qubits) != self.n:
            raise InvalidInput("qubit list does not match operator length")
        u = v = 0
        for j, q in enumerate(qubits):
            u |= ((self.u >> j) & 1) << q
            v |= ((self.v >> j) & 1) << q
        # phase is relative to i^{u.v}; embedding preserves u.v
        return PauliOperator(u, v, n, self.phase)

    def to_matrix(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix, qubit 0 as the most significant tensor factor."""
        mats = {
            "I": np.eye(2, dtype=complex),
            "X": np.array([[0, 1], [1, 0]], dtype=complex),
            "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
            "Z": np.array([[1, 0], [0, -1]], dtype=complex),
        }
        m = reduce(np.kron, [mats[c] for c in self.labels()])
        return (1j ** ((self.phase + 2 * self.y_count) % 4)) * m


def decompose(s: str) -> PauliOperator:
    """Parse an optionally signed Pauli string such as ``"-XYZ"``."""
    if not isinstance(s, str):
        raise InvalidInput("expected a string")
    body = s.strip()
    sign = 0
    if body[:1] in "+-" and body:
        sign = 0 if body[0] == "+" else 2
        body = body[1:]
    if not body:
        raise InvalidInput("empty Pauli string")
    u = v = 0
    for j, ch in enumerate(body.upper()):
        if ch not in "IXYZ":
            raise InvalidInput(f"bad Pauli label {ch!r}")
        if ch in "XY":
            u |= 1 << j
        if ch in "ZY":
            v |= 1 << j
    # each Y equals -i ZX, so the label string is (-1)^{u.v} i^{u.v} Z[v]X[u]
    return PauliOperator(u, v, len(body), sign + 2 * _popcount(u & v))


def compose(p: PauliOperator) -> str:
    return p.to_string()


def _check_pair(p: PauliOperator, q: PauliOperator):
    if p.n != q.n:
        raise InvalidInput("operators act on different qubit counts")


def commutes(p: PauliOperator, q: PauliOperator) -> bool:
    _check_pair(p, q)
    return (_popcount(p.u & q.v) + _popcount(p.v & q.u)) % 2 == 0


def multiply(p: PauliOperator, q: PauliOperator) -> PauliOperator:
    """Exact product p*q."""
    _check_pair(p, q)
    # Z[v]X[u] Z[v']X[u'] = (-1)^{u.v'} Z[v^v'] X[u^u']
    total = p.phase + q.phase + p.y_count + q.y_count + 2 * _popcount(p.u & q.v)
    u, v = p.u ^ q.u, p.v ^ q.v
    return PauliOperator(u, v, p.n, total - _popcount(u & v))


def tensor(*ops: PauliOperator) -> PauliOperator:
    u = v = 0
    n = 0
    phase = 0
    for op in ops:
        u |= op.u << n
        v |= op.v << n
        n += op.n
        phase += op.phase
    return PauliOperator(u, v, n, phase)


def x_on(n: int, mask: int) -> PauliOperator:
    return PauliOperator(mask, 0, n)


def z_on(n: int, mask: int) -> PauliOperator:
    return PauliOperator(0, mask, n)

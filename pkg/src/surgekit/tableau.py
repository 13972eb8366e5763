"""Stabilizer tableau simulator (Aaronson-Gottesman layout).

Rows ``0..n-1`` are destabilizers and rows ``n..2n-1`` stabilizers.  Each row
is a Hermitian Pauli (-1)^r * prod X^x Z^z with (x, z) = (1, 1) meaning Y.
Arbitrary Pauli products can be measured directly, which is what the
lattice-surgery and twist-free checks need.
"""
import numpy as np

from . import gf2
from .errors import InvalidInput
from .pauli import PauliOperator


def _g(x1, z1, x2, z2):
    """Power of i picked up when multiplying Pauli (x1,z1) onto (x2,z2)."""
    x1 = x1.astype(np.int8)
    z1 = z1.astype(np.int8)
    x2 = x2.astype(np.int8)
    z2 = z2.astype(np.int8)
    return np.where(
        x1 & z1,
        z2 - x2,
        np.where(x1, z2 * (2 * x2 - 1), np.where(z1, x2 * (1 - 2 * z2), 0)),
    )


def pauli_to_row(p: PauliOperator):
    x = p.u_bits.astype(bool)
    z = p.v_bits.astype(bool)
    return x, z, p.sign < 0


def row_to_pauli(x, z, r) -> PauliOperator:
    op = PauliOperator.from_bits(x.astype(np.uint8), z.astype(np.uint8))
    return op.with_sign(-1 if r else 1)


class Tableau:
    def __init__(self, x, z, r):
        self.x = np.asarray(x, dtype=bool)
        self.z = np.asarray(z, dtype=bool)
        self.r = np.asarray(r, dtype=bool)
        self.n = self.x.shape[1]

    @classmethod
    def zero(cls, n: int) -> "Tableau":
        eye = np.eye(n, dtype=bool)
        zeros = np.zeros((n, n), dtype=bool)
        return cls(np.vstack([eye, zeros]), np.vstack([zeros, eye]), np.zeros(2 * n, dtype=bool))

    def copy(self) -> "Tableau":
        return Tableau(self.x.copy(), self.z.copy(), self.r.copy())

    # Clifford gates -----------------------------------------------------------
    def h(self, q):
        self.r ^= self.x[:, q] & self.z[:, q]
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def s(self, q):
        self.r ^= self.x[:, q] & self.z[:, q]
        self.z[:, q] ^= self.x[:, q]

    def sdg(self, q):
        self.r ^= self.x[:, q] & ~self.z[:, q]
        self.z[:, q] ^= self.x[:, q]

    def cx(self, c, t):
        x, z = self.x, self.z
        self.r ^= x[:, c] & z[:, t] & ~(x[:, t] ^ z[:, c])
        x[:, t] ^= x[:, c]
        z[:, c] ^= z[:, t]

    def cz(self, a, b):
        self.h(b)
        self.cx(a, b)
        self.h(b)

    def pauli_gate(self, label, q):
        if label == "X":
            self.r ^= self.z[:, q]
        elif label == "Z":
            self.r ^= self.x[:, q]
        elif label == "Y":
            self.r ^= self.x[:, q] ^ self.z[:, q]

    def apply_gate(self, gate):
        name, qs = gate[0], gate[1:]
        if name == "H":
            self.h(*qs)
        elif name == "S":
            self.s(*qs)
        elif name == "SDG":
            self.sdg(*qs)
        elif name == "CX":
            self.cx(*qs)
        elif name == "CZ":
            self.cz(*qs)
        elif name in ("X", "Y", "Z"):
            self.pauli_gate(name, *qs)
        else:
            raise InvalidInput(f"non-Clifford gate {name!r}")
        return self

    def apply_gates(self, gates):
        for g in gates:
            self.apply_gate(g)
        return self

    def apply_pauli(self, p: PauliOperator):
        """Apply a Pauli operator (global phase ignored)."""
        px, pz, _ = pauli_to_row(p)
        anti = ((self.x & pz).sum(1) + (self.z & px).sum(1)) % 2 == 1
        self.r ^= anti
        return self

    # row algebra --------------------------------------------------------------
    def _rowmult(self, rows, i):
        """rows <- rows * row i (phases tracked exactly)."""
        if len(rows) == 0:
            return
        gsum = _g(self.x[i][None, :], self.z[i][None, :], self.x[rows], self.z[rows]).sum(1)
        tot = 2 * self.r[rows].astype(np.int64) + 2 * int(self.r[i]) + gsum
        self.r[rows] = (tot % 4) == 2
        self.x[rows] ^= self.x[i]
        self.z[rows] ^= self.z[i]

    @staticmethod
    def _mult_into(acc, x, z, r):
        ax, az, ar = acc
        gsum = int(_g(x, z, ax, az).sum())
        tot = 2 * int(ar) + 2 * int(r) + gsum
        return ax ^ x, az ^ z, (tot % 4) == 2

    # measurement ---------------------------------------------------------------
    def anticommuting_rows(self, p: PauliOperator) -> np.ndarray:
        px, pz, _ = pauli_to_row(p)
        return ((self.x & pz).sum(1) + (self.z & px).sum(1)) % 2 == 1

    def is_deterministic(self, p: PauliOperator) -> bool:
        return not self.anticommuting_rows(p)[self.n:].any()

    def peek(self, p: PauliOperator):
        """Outcome bit if deterministic, else None (state untouched)."""
        if p.n != self.n:
            raise InvalidInput("operator size does not match state")
        anti = self.anticommuting_rows(p)
        if anti[self.n:].any():
            return None
        acc = (np.zeros(self.n, bool), np.zeros(self.n, bool), False)
        for i in np.nonzero(anti[: self.n])[0]:
            k = i + self.n
            acc = self._mult_into(acc, self.x[k], self.z[k], self.r[k])
        px, pz, neg = pauli_to_row(p)
        if not (np.array_equal(acc[0], px) and np.array_equal(acc[1], pz)):
            raise InvalidInput("internal tableau inconsistency")
        return int(acc[2]) ^ int(neg)

    def measure_pauli(self, p: PauliOperator, rng, forced: int | None = None) -> int:
        if not p.is_hermitian:
            raise InvalidInput("measured operator must be Hermitian")
        if p.n != self.n:
            raise InvalidInput("operator size does not match state")
        n = self.n
        anti = self.anticommuting_rows(p)
        hits = np.nonzero(anti[n:])[0]
        if hits.size == 0:
            b = self.peek(p)
            if forced is not None and forced != b:
                raise InvalidInput("forced outcome has zero probability")
            return b
        pr = n + hits[0]
        others = np.nonzero(anti)[0]
        others = others[others != pr]
        self._rowmult(others, pr)
        self.x[pr - n], self.z[pr - n], self.r[pr - n] = self.x[pr], self.z[pr], self.r[pr]
        b = int(rng.integers(2)) if forced is None else int(forced)
        px, pz, neg = pauli_to_row(p)
        self.x[pr], self.z[pr], self.r[pr] = px, pz, bool(b) ^ neg
        return b

    def measure_z(self, q: int, rng) -> int:
        return self.measure_pauli(PauliOperator(0, 1 << q, self.n), rng)

    # register management ---------------------------------------------------------
    def append_qubits(self, k: int) -> "Tableau":
        """New tableau with ``k`` extra qubits in |0> appended at the end."""
        n, m = self.n, self.n + k
        x = np.zeros((2 * m, m), bool)
        z = np.zeros((2 * m, m), bool)
        r = np.zeros(2 * m, bool)
        x[:n, :n] = self.x[:n]
        z[:n, :n] = self.z[:n]
        x[m:m + n, :n] = self.x[n:]
        z[m:m + n, :n] = self.z[n:]
        r[:n] = self.r[:n]
        r[m:m + n] = self.r[n:]
        for j in range(k):
            x[n + j, n + j] = True
            z[m + n + j, n + j] = True
        return Tableau(x, z, r)

    def stabilizers(self) -> list:
        n = self.n
        return [row_to_pauli(self.x[n + i], self.z[n + i], self.r[n + i]) for i in range(n)]

    @classmethod
    def from_stabilizers(cls, stabs) -> "Tableau":
        """Build a tableau from ``n`` independent commuting Hermitian Paulis."""
        n = stabs[0].n
        if len(stabs) != n:
            raise InvalidInput("need exactly n stabilizer generators")
        rows = [pauli_to_row(s) for s in stabs]
        sx = np.array([r[0] for r in rows], dtype=np.uint8)
        sz = np.array([r[1] for r in rows], dtype=np.uint8)
        if gf2.rank(np.hstack([sx, sz])) != n:
            raise InvalidInput("stabilizers are not independent")
        m = np.hstack([sz, sx])  # <D, S_j> = D_x.S_z + D_z.S_x
        dest = []
        for i in range(n):
            e = np.zeros(n, dtype=np.uint8)
            e[i] = 1
            sol = gf2.solve(m, e)
            if sol is None:
                raise InvalidInput("stabilizers do not commute")
            dest.append([sol[:n].copy(), sol[n:].copy()])
        for i in range(n):
            for j in range(i):
                dx, dz = dest[i]
                ox, oz = dest[j]
                if (int(dx @ oz) + int(dz @ ox)) % 2:
                    dest[i][0] = dx ^ sx[j]
                    dest[i][1] = dz ^ sz[j]
        x = np.vstack([np.array([d[0] for d in dest]), sx]).astype(bool)
        z = np.vstack([np.array([d[1] for d in dest]), sz]).astype(bool)
        r = np.concatenate([np.zeros(n, bool), np.array([row[2] for row in rows], bool)])
        return cls(x, z, r)

    def single_qubit_state(self, q: int):
        """(label, bit) if qubit ``q`` is in a pure Pauli eigenstate, else None."""
        for label in "ZXY":
            b = self.peek(PauliOperator.single(self.n, q, label))
            if b is not None:
                return label, b
        return None

    def drop_qubits(self, qubits) -> "Tableau":
        """Discard qubits that are unentangled and in Pauli eigenstates."""
        t = self.copy()
        for q in sorted(qubits, reverse=True):
            t = t._drop_one(q)
        return t

    def _drop_one(self, q: int) -> "Tableau":
        st = self.single_qubit_state(q)
        if st is None:
            raise InvalidInput(f"qubit {q} is entangled with the rest")
        label, b = st
        t = self.copy()
        if label == "X":
            t.h(q)
        elif label == "Y":
            t.sdg(q)
            t.h(q)
        if b:
            t.pauli_gate("X", q)
        n = t.n
        stab = np.arange(n, 2 * n)
        if t.x[stab, q].any():
            raise InvalidInput("internal tableau inconsistency")
        withz = stab[t.z[stab, q]]
        piv = withz[0]
        t._rowmult(withz[1:], piv)
        keep = [i for i in stab if i != piv]
        cols = [c for c in range(n) if c != q]
        stabs = [row_to_pauli(t.x[i, cols], t.z[i, cols], t.r[i]) for i in keep]
        return Tableau.from_stabilizers(stabs)

    # comparison ---------------------------------------------------------------
    def canonical(self):
        """Reduced row-echelon form of the stabilizer group, signs included."""
        n = self.n
        t = Tableau(self.x[n:].copy(), self.z[n:].copy(), self.r[n:].copy())
        t.n = n
        mat = np.hstack([t.x, t.z])
        row = 0
        for c in range(2 * n):
            hit = np.nonzero(mat[row:, c])[0]
            if hit.size == 0:
                continue
            p = row + hit[0]
            if p != row:
                for arr in (t.x, t.z, t.r):
                    arr[[row, p]] = arr[[p, row]]
                mat[[row, p]] = mat[[p, row]]
            others = np.nonzero(mat[:, c])[0]
            others = others[others != row]
            t._rowmult(others, row)
            mat = np.hstack([t.x, t.z])
            row += 1
            if row == n:
                break
        return np.hstack([t.x, t.z, t.r[:, None]])

    def same_state(self, other: "Tableau") -> bool:
        return self.n == other.n and np.array_equal(self.canonical(), other.canonical())


def random_stabilizer_state(n: int, rng, depth: int | None = None) -> Tableau:
    from .clifford import random_clifford

    t = Tableau.zero(n)
    t.apply_gates(random_clifford(n, rng, depth).gates)
    return t

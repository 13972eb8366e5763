"""Small dense linear algebra over GF(2) on numpy uint8 matrices."""
import numpy as np


def as_gf2(a) -> np.ndarray:
    return np.array(a, dtype=np.uint8) & 1


def rref(a):
    """Row-reduced echelon form. Returns (R, pivot_columns)."""
    m = as_gf2(a).copy()
    if m.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hit = np.nonzero(m[r:, c])[0]
        if hit.size == 0:
            continue
        p = r + hit[0]
        if p != r:
            m[[r, p]] = m[[p, r]]
        others = np.nonzero(m[:, c])[0]
        others = others[others != r]
        m[others] ^= m[r]
        pivots.append(c)
        r += 1
    return m, pivots


def rank(a) -> int:
    return len(rref(a)[1])


def nullspace(a) -> np.ndarray:
    """Basis (as rows) of {x : a x = 0}."""
    a = as_gf2(a)
    cols = a.shape[1]
    r, piv = rref(a)
    free = [c for c in range(cols) if c not in piv]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, pc in enumerate(piv):
            basis[i, pc] = r[row, f]
    return basis


def solve(a, b):
    """One solution x of a x = b, or None when inconsistent."""
    a = as_gf2(a)
    b = as_gf2(b).reshape(-1, 1)
    aug, piv = rref(np.hstack([a, b]))
    cols = a.shape[1]
    if cols in piv:
        return None
    x = np.zeros(cols, dtype=np.uint8)
    for row, pc in enumerate(piv):
        x[pc] = aug[row, cols]
    return x


def in_row_span(vec, g) -> bool:
    g = as_gf2(g)
    return rank(np.vstack([g, as_gf2(vec).reshape(1, -1)])) == rank(g)

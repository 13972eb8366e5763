"""Temporally encoded lattice surgery (TELS).

A set of k commuting Pauli measurements is replaced by n measurements of
products chosen by the columns of a k x n generator matrix G.  Outcome
vectors outside the row span of G reveal timelike failures; the protocol
then remeasures the original set with longer surgery.
"""
from dataclasses import dataclass, field
from functools import cached_property
import json
import math

import numpy as np

from . import gf2
from .errors import BudgetInfeasible, InvalidCode, InvalidInput, NotParallelizable
from .pauli import PauliOperator, commutes, multiply

BRUTE_FORCE_K = 20
ENUM_LIMIT = 24        # enumerate at most 2^24 words of the code or its dual
FULL_UNION_N = 16


@dataclass(frozen=True, eq=False)
class MeasurementCode:
    G: np.ndarray
    family: str = "custom"

    def __post_init__(self):
        g = gf2.as_gf2(self.G)
        if g.ndim != 2 or g.shape[0] == 0 or g.shape[1] < g.shape[0]:
            raise InvalidCode("G must be k x n with 1 <= k <= n")
        if gf2.rank(g) != g.shape[0]:
            raise InvalidCode("G is rank deficient")
        object.__setattr__(self, "G", g)

    @property
    def k(self) -> int:
        return self.G.shape[0]

    @property
    def n(self) -> int:
        return self.G.shape[1]

    @cached_property
    def dual(self) -> np.ndarray:
        """Basis of G-perp = {u : G u = 0}, as rows."""
        return gf2.nullspace(self.G)

    @cached_property
    def weight_enumerator(self) -> list:
        return weight_enumerator(self.G)

    @cached_property
    def d(self) -> int:
        return next(w for w, a in enumerate(self.weight_enumerator) if w > 0 and a > 0)

    @property
    def params(self) -> tuple:
        return self.n, self.k, self.d

    def __repr__(self):
        return f"MeasurementCode[{self.n},{self.k},{self.d}]({self.family})"

    def to_json(self) -> str:
        return json.dumps({"family": self.family, "G": self.G.tolist()})

    @classmethod
    def from_json(cls, text_or_dict) -> "MeasurementCode":
        d = json.loads(text_or_dict) if isinstance(text_or_dict, str) else text_or_dict
        return cls(np.array(d["G"]), d.get("family", "custom"))


# ---------------------------------------------------------------------------
# weights

def _pack_rows(g: np.ndarray) -> np.ndarray:
    """Rows of a 0/1 matrix as little-endian uint64 words."""
    k, n = g.shape
    w = (n + 63) // 64
    padded = np.zeros((k, w * 64), dtype=np.uint8)
    padded[:, :n] = g
    return np.packbits(padded, axis=1, bitorder="little").view(np.uint64).reshape(k, w)


def span_weights(g) -> list:
    """Histogram of Hamming weights over the full row span (2^k words)."""
    g = gf2.as_gf2(g)
    k, n = g.shape
    rows = _pack_rows(g)
    lo = min(k, 16)
    table = np.zeros((1 << lo, rows.shape[1]), dtype=np.uint64)
    for i in range(lo):
        table[1 << i: 2 << i] = table[: 1 << i] ^ rows[i]
    hist = np.zeros(n + 1, dtype=np.int64)
    hi = np.zeros(rows.shape[1], dtype=np.uint64)
    for t in range(1 << (k - lo)):
        if t:
            # Gray-code step over the remaining rows
            hi ^= rows[lo + (t & -t).bit_length() - 1]
        wts = np.bitwise_count(table ^ hi).sum(axis=1)
        hist += np.bincount(wts, minlength=n + 1)
    return [int(a) for a in hist]


def _krawtchouk(n: int, w: int, j: int) -> int:
    return sum((-1) ** s * math.comb(j, s) * math.comb(n - j, w - s) for s in range(0, min(j, w) + 1))


def weight_enumerator(g) -> list:
    """Exact A_w for w = 0..n.

    Enumerates whichever of the code and its dual is smaller and applies the
    MacWilliams transform when the dual was used.
    """
    g = gf2.as_gf2(g)
    k, n = g.shape
    if k <= n - k or k <= 12:
        if k > ENUM_LIMIT:
            raise InvalidCode(f"code too large to enumerate (k={k})")
        return span_weights(g)
    h = gf2.nullspace(g)
    if h.shape[0] > ENUM_LIMIT:
        raise InvalidCode(f"code too large to enumerate (n-k={h.shape[0]})")
    b = span_weights(h) if h.shape[0] else [1] + [0] * n
    size = 1 << h.shape[0]
    out = []
    for w in range(n + 1):
        num = sum(b[j] * _krawtchouk(n, w, j) for j in range(n + 1) if b[j])
        if num % size:
            raise InvalidCode("MacWilliams transform gave a non-integer count")
        out.append(num // size)
    return out


def code_distance(g) -> int:
    """Minimum nonzero weight in the row span (brute force, k <= 20)."""
    g = gf2.as_gf2(g)
    if g.ndim != 2 or gf2.rank(g) != g.shape[0]:
        raise InvalidCode("G is rank deficient")
    if g.shape[0] > BRUTE_FORCE_K:
        raise InvalidCode(f"brute force limited to k <= {BRUTE_FORCE_K}")
    hist = span_weights(g)
    return next(w for w in range(1, len(hist)) if hist[w])


def is_undetected(e, code) -> bool:
    """True iff the error pattern lies in the row span (no dual check fires)."""
    g = code.G if isinstance(code, MeasurementCode) else gf2.as_gf2(code)
    e = gf2.as_gf2(e).ravel()
    if e.size != g.shape[1]:
        raise InvalidInput("error length differs from code length")
    h = code.dual if isinstance(code, MeasurementCode) else gf2.nullspace(g)
    return not np.any((h.astype(np.int64) @ e) & 1)


# ---------------------------------------------------------------------------
# catalog

def identity_code(k: int) -> MeasurementCode:
    return MeasurementCode(np.eye(k, dtype=np.uint8), "unencoded")


def parity_code(alpha: int) -> MeasurementCode:
    """[alpha+1, alpha, 2]: every Pauli plus the product of all of them."""
    return MeasurementCode(np.hstack([np.eye(alpha, dtype=np.uint8), np.ones((alpha, 1), np.uint8)]),
                           "parity")


def concatenate(code: MeasurementCode, times: int = 2, family: str | None = None) -> MeasurementCode:
    g = code.G
    for _ in range(times - 1):
        g = np.kron(g, code.G)
    return MeasurementCode(g, family or f"{code.family}^{times}")


def product_code(alpha: int, beta: int) -> MeasurementCode:
    return MeasurementCode(np.kron(parity_code(alpha).G, parity_code(beta).G), "product")


def extended_hamming(m: int) -> MeasurementCode:
    """[2^m, 2^m - m - 1, 4] as the null space of the first-order RM generator."""
    n = 1 << m
    h = np.array([[1] * n] + [[(j >> b) & 1 for j in range(n)] for b in reversed(range(m))], np.uint8)
    return MeasurementCode(gf2.nullspace(h), "hamming")


# the two small examples, written out row by row
G_322 = np.array([[1, 0, 1], [0, 1, 1]], np.uint8)
G_844 = np.array([
    [0, 0, 0, 0, 1, 1, 1, 1],
    [1, 1, 1, 1, 0, 0, 0, 0],
    [1, 1, 0, 0, 1, 1, 0, 0],
    [1, 0, 1, 0, 1, 0, 1, 0],
], np.uint8)


def catalog() -> list:
    """Codes shipped with the toolkit (all with n <= 16)."""
    out = [MeasurementCode(G_322, "parity"), MeasurementCode(G_844, "hamming")]
    out += [identity_code(k) for k in (1, 3, 5)]
    out += [parity_code(a) for a in (3, 5, 8, 15)]
    out += [concatenate(parity_code(a), 2, "concat2") for a in (2, 3)]
    out += [extended_hamming(4), product_code(2, 3)]
    return out


def shorten(code: MeasurementCode, k: int) -> MeasurementCode:
    """Keep k of the code's Paulis, dropping measurement columns that become trivial.

    Rows are removed greedily from the reduced echelon form, each time
    taking the row whose removal empties the most columns.  The distance
    never decreases.
    """
    if k > code.k or k < 1:
        raise InvalidCode(f"cannot shorten a k={code.k} code to k={k}")
    if k == code.k:
        return code
    g, _ = gf2.rref(code.G)
    keep = list(range(code.k))
    while len(keep) > k:
        best, best_zero = None, -1
        for i in keep:
            rest = [j for j in keep if j != i]
            zero = int(np.sum(~g[rest].any(axis=0)))
            if zero > best_zero:
                best, best_zero = i, zero
        keep.remove(best)
    sub = g[keep]
    sub = sub[:, sub.any(axis=0)]
    return MeasurementCode(sub, code.family)


def family_code(family: str, k: int, shortened: bool = False) -> MeasurementCode | None:
    """Smallest member of ``family`` holding at least k Paulis (None if absent)."""
    if family == "unencoded":
        return identity_code(k)
    if family == "parity":
        return parity_code(k)
    if family in ("concat2", "concat3"):
        t = 2 if family == "concat2" else 3
        a = 1
        while a ** t < k:
            a += 1
        code = concatenate(parity_code(a), t, family)
    elif family == "hamming":
        m = 3
        while (1 << m) - m - 1 < k:
            m += 1
        code = extended_hamming(m)
    elif family == "product":
        # alpha, beta >= 2; exact members need alpha * beta == k
        best = None
        for a in range(2, k + 1):
            b = max(a, -(-k // a))
            if a * a > k and best is not None:
                break
            if not shortened and a * b != k:
                continue
            n = (a + 1) * (b + 1)
            if best is None or n < best[0]:
                best = (n, a, b)
        if best is None:
            return None
        code = product_code(best[1], best[2])
    else:
        raise InvalidInput(f"unknown code family {family!r}")
    if code.k == k:
        return code
    return shorten(code, k) if shortened else None


# ---------------------------------------------------------------------------
# measurement sets

def build_measurement_set(paulis, code) -> list:
    """Q[x^j] = prod_i P_i^{G_ij} for every column j of G."""
    g = code.G if isinstance(code, MeasurementCode) else gf2.as_gf2(code)
    paulis = list(paulis)
    if len(paulis) != g.shape[0]:
        raise InvalidInput(f"need {g.shape[0]} Paulis, got {len(paulis)}")
    for i in range(len(paulis)):
        for j in range(i + 1, len(paulis)):
            if not commutes(paulis[i], paulis[j]):
                raise NotParallelizable(f"P{i + 1} and P{j + 1} anticommute")
    n = paulis[0].n
    out = []
    for col in g.T:
        q = PauliOperator.identity(n)
        for i in np.flatnonzero(col):
            q = multiply(q, paulis[i])
        out.append(q)
    return out


def symplectic_matrix(paulis) -> np.ndarray:
    return np.array([list(p.u_bits) + list(p.v_bits) for p in paulis], np.uint8)


def same_group(a, b) -> bool:
    """Equal generated groups up to signs (symplectic rank test)."""
    ma, mb = symplectic_matrix(a), symplectic_matrix(b)
    r = gf2.rank(ma)
    return r == gf2.rank(mb) == gf2.rank(np.vstack([ma, mb]))


# ---------------------------------------------------------------------------
# timelike model and planning

@dataclass(frozen=True)
class TimelikeModel:
    """P(d_m) = A * area * (B p)^(c (d_m + 1)), one merged-surgery failure."""
    A: float = 0.01634
    B: float = 21.93
    area: float = 100.0
    p: float = 1e-3
    c: float = 0.5

    def __post_init__(self):
        if not self.B * self.p < 1:
            raise BudgetInfeasible("B p must be below 1")

    def prob(self, d_m) -> float:
        return min(1.0, self.A * self.area * (self.B * self.p) ** (self.c * (d_m + 1)))


@dataclass
class TelsPlan:
    code: MeasurementCode
    k: int
    d_m: int
    q: float
    remeasure_rounds: int
    p_fail: float           # single-measurement timelike failure at d_m
    p_detect: float
    p_undetected: float
    failure: float          # block failure probability
    budget: float
    runtime: float          # expected rounds for the block
    mode: str = "detect"
    extra: dict = field(default_factory=dict)

    @property
    def runtime_per_pauli(self) -> float:
        return self.runtime / self.k

    @property
    def magic_states_held(self) -> int:
        # every Pauli of the block consumes a magic state kept until the block ends
        return self.k


def undetected_probability(code: MeasurementCode, P: float, union: str = "auto") -> float:
    """Probability that a nonzero error pattern is invisible.

    ``full``: union bound over all nonzero codewords, sum_w A_w P^w.
    ``leading``: only the minimum-weight term A_d P^d.
    ``exact``: sum_w A_w P^w (1-P)^(n-w).
    ``auto``: full for n <= 16, leading otherwise.
    """
    a = code.weight_enumerator
    if union == "auto":
        union = "full" if code.n <= FULL_UNION_N else "leading"
    if union == "leading":
        return a[code.d] * P ** code.d
    if union == "full":
        return sum(a[w] * P ** w for w in range(1, code.n + 1) if a[w])
    if union == "exact":
        return sum(a[w] * P ** w * (1 - P) ** (code.n - w) for w in range(1, code.n + 1) if a[w])
    raise InvalidInput(f"unknown union mode {union!r}")


def detection_probability(code: MeasurementCode, P: float) -> float:
    """1 - (1-P)^n minus the exact undetected mass."""
    return max(0.0, -math.expm1(code.n * math.log1p(-P)) - undetected_probability(code, P, "exact")) \
        if P < 1 else 1.0


def q_grid(d: int) -> list:
    out = sorted({b + o for b in (d - 1, d, d + 1) for o in (-0.25, 0.0, 0.25) if b + o >= 1})
    return out or [1.0]


def plan_tels(code: MeasurementCode, model: TimelikeModel, delta: float, k: int | None = None,
              per_pauli: bool = True, union: str = "auto", qs=None, max_dm: int = 500) -> TelsPlan:
    """Smallest d_m meeting the block budget under detect/remeasure.

    Expected runtime n (d_m + 1) + p_d k ceil(q d_m); the remeasure runs the k
    original Paulis with ceil(q d_m) merged rounds.
    """
    k = k or code.k
    budget = delta * k if per_pauli else delta
    qs = qs or q_grid(code.d)
    for d_m in range(1, max_dm + 1):
        P = model.prob(d_m)
        und = undetected_probability(code, P, union)
        if und > budget:
            continue
        if code.d == 1:
            # nothing is ever detected
            return TelsPlan(code, k, d_m, 0.0, 0, P, 0.0, und, und, budget, code.n * (d_m + 1))
        pd = detection_probability(code, P)
        best = None
        for q in qs:
            rr = math.ceil(q * d_m - 1e-9)
            fail_r = -math.expm1(k * math.log1p(-model.prob(rr))) if model.prob(rr) < 1 else 1.0
            total = und + pd * fail_r
            if total > budget:
                continue
            t = code.n * (d_m + 1) + pd * k * rr
            if best is None or t < best[0]:
                best = (t, q, rr, total)
        if best is not None:
            t, q, rr, total = best
            return TelsPlan(code, k, d_m, q, rr, P, pd, und, total, budget, t)
    raise BudgetInfeasible(f"no d_m <= {max_dm} meets the budget {budget:g}")


def plan_unencoded(k: int, model: TimelikeModel, delta: float, **kw) -> TelsPlan:
    return plan_tels(identity_code(k), model, delta, **kw)


def plan_error_correction(code: MeasurementCode, model: TimelikeModel, delta: float,
                          per_pauli: bool = True, max_dm: int = 500) -> TelsPlan:
    """Decode the overcomplete outcomes instead of remeasuring: T' = n (d'_m + 1).

    Fails once ceil(d/2) or more measurements are wrong.
    """
    k = code.k
    budget = delta * k if per_pauli else delta
    t = math.ceil(code.d / 2)
    for d_m in range(1, max_dm + 1):
        P = model.prob(d_m)
        fail = sum(math.comb(code.n, w) * P ** w * (1 - P) ** (code.n - w) for w in range(t, code.n + 1))
        if fail <= budget:
            return TelsPlan(code, k, d_m, 0.0, 0, P, 0.0, fail, fail, budget, code.n * (d_m + 1),
                            mode="correct")
    raise BudgetInfeasible(f"no d_m <= {max_dm} meets the budget {budget:g}")


DEFAULT_FAMILIES = ("unencoded", "parity", "concat2", "hamming", "product")


def sweep_families(ks, model: TimelikeModel, delta: float, families=DEFAULT_FAMILIES,
                   shortened: bool = False) -> list:
    """Rows (k, family, n, d, d_m, runtime per Pauli, ratio to unencoded).

    By default only exact family members appear (a family is skipped at k
    where it has none); ``shortened`` fills the gaps with shortened codes.
    """
    rows = []
    for k in ks:
        base = plan_unencoded(k, model, delta)
        for fam in families:
            code = family_code(fam, k, shortened)
            if code is None:
                continue
            try:
                plan = plan_tels(code, model, delta, k=k)
            except BudgetInfeasible:
                continue
            rows.append({"k": k, "family": fam, "n": code.n, "d": code.d, "dm": plan.d_m,
                         "runtime_per_pauli": plan.runtime_per_pauli,
                         "ratio": plan.runtime / base.runtime})
    return rows


def best_family(rows, k: int) -> str:
    cand = [r for r in rows if r["k"] == k]
    return min(cand, key=lambda r: r["runtime_per_pauli"])["family"]


def simulate_tels(plan: TelsPlan, trials: int, rng, model: TimelikeModel | None = None,
                  batch: int = 200_000) -> dict:
    """Monte Carlo of detect/remeasure with i.i.d. timelike flips.

    Uses P(d_m) from the plan; the remeasure failure comes from ``model``
    (defaults to a model reproducing the plan's rates at d_m).
    """
    code = plan.code
    h = code.dual.astype(np.int64)
    P = plan.p_fail
    P_r = model.prob(plan.remeasure_rounds) if model is not None else 0.0
    base = code.n * (plan.d_m + 1)
    fails = detects = 0
    done = 0
    while done < trials:
        m = min(batch, trials - done)
        e = rng.random((m, code.n)) < P
        det = ((e.astype(np.int64) @ h.T) & 1).any(axis=1) if h.size else np.zeros(m, bool)
        bad_und = ~det & e.any(axis=1)
        n_det = int(det.sum())
        redo = (rng.random((n_det, plan.k)) < P_r).any(axis=1) if n_det else np.zeros(0, bool)
        fails += int(bad_und.sum()) + int(redo.sum())
        detects += n_det
        done += m
    mean_rt = base + detects / trials * plan.k * plan.remeasure_rounds
    return {"trials": trials, "failure_rate": fails / trials, "detect_rate": detects / trials,
            "mean_runtime": mean_rt, "detections": detects, "failures": fails}

"""Resource accounting for a core-cache layout running sequential Pauli-based computation.

Everything that can be is kept in exact rational arithmetic; only the three
failure-budget inequalities used to pick distances are evaluated in floats.
"""
from dataclasses import dataclass, asdict
from fractions import Fraction

from .errors import BudgetInfeasible, InvalidConfig
from .pauli import PauliOperator

DISTANCE_CAP = 51

# fitted failure-rate constants (A, B) for the three budgeted classes
TIMELIKE = (0.01634, 21.93)
SPACELIKE_Z = (0.03148, 28.91)
SPACELIKE_X = (0.0148, 0.762)


@dataclass(frozen=True)
class AlgorithmProfile:
    N_A: int = 0
    N_T: int = 0
    N_TOF: int = 0
    N_unTOF: int = 0
    gamma: int | None = None      # T-depth, for the average parallel set size

    @property
    def mu(self) -> int:
        return mu_count(self)

    @property
    def k(self) -> Fraction | None:
        return None if not self.gamma else Fraction(self.mu, self.gamma)


def mu_count(profile: AlgorithmProfile) -> int:
    """Number of Pauli measurements: readouts, T teleports, 3 per Toffoli, uncomputes."""
    vals = (profile.N_A, profile.N_T, profile.N_TOF, profile.N_unTOF)
    if any(v < 0 for v in vals):
        raise InvalidConfig("counts must be non-negative")
    return profile.N_A + profile.N_T + 3 * profile.N_TOF + profile.N_unTOF


def pbc_time(mu: int, d_m: int) -> int:
    """Rounds to teleport mu magic states sequentially (one reset round each)."""
    return (d_m + 1) * mu


def classify_bottleneck(t_magic, t_pbc):
    """('Clifford' | 'magic-state', runtime)."""
    if t_magic <= 0 or t_pbc <= 0:
        raise InvalidConfig("times must be positive")
    tag = "Clifford" if t_magic < t_pbc else "magic-state"
    return tag, max(t_magic, t_pbc)


# ---------------------------------------------------------------------------
# routing overheads

def unit_cell_overhead(d_x: int, d_z: int) -> Fraction:
    if d_x <= 0 or d_z <= 0:
        raise InvalidConfig("distances must be positive")
    return Fraction((2 * d_z + d_x + 1) * (3 * d_x + 1), 4 * d_z * d_x)


def unit_cell_asymptote(ratio) -> Fraction:
    """Large-distance limit at fixed d_x / d_z."""
    return Fraction(3, 2) + Fraction(3, 4) * Fraction(ratio)


def padded_tiles(d_x: int, d_z: int, h: int, w: int) -> dict:
    s1 = h * (3 * d_x + 1)
    s2 = d_x + 2 + w * (2 * d_z + d_x + 1)
    s3 = h * (3 * d_x + 1) * (d_x + 1)
    s4 = (d_x + 1) * (w * (2 * d_z + d_x + 1) + d_x + 2)
    return {"s1": s1, "s2": s2, "s3": s3, "s4": s4, "S_TRGP": s1 + s2 + s3 + s4}


def core_tiles(d_x: int, d_z: int, h: int, w: int) -> int:
    """Tilde-O_core: tiles of the h x w unit cells plus the padding."""
    return w * h * (2 * d_z + d_x + 1) * (3 * d_x + 1) + padded_tiles(d_x, d_z, h, w)["S_TRGP"]


def core_overhead(d_x: int, d_z: int, h: int, w: int) -> Fraction:
    return Fraction(core_tiles(d_x, d_z, h, w), 4 * w * h * d_z * d_x)


def cache_multiplier(d_x: int, n_2: int) -> Fraction:
    return 1 + Fraction(n_2 - 1, n_2 * d_x)


def total_overhead(d_x: int, d_z: int, h: int, w: int, n_2: int) -> Fraction:
    if n_2 < 1:
        raise InvalidConfig("the cache must hold at least one logical qubit")
    num = core_tiles(d_x, d_z, h, w) + d_z * (n_2 * (d_x + 1) - 1)
    return Fraction(num, d_x * d_z * (4 * w * h + n_2))


# ---------------------------------------------------------------------------
# Hubbard-model pipeline

@dataclass(frozen=True)
class ResourceEstimate:
    L: int
    h: int
    w: int
    d_x: int
    d_z: int
    d_m: int | None
    N_core: int
    N_2: int
    N_TLQ: int
    S_TRGP: int
    O_core: Fraction
    O_total: Fraction
    N_phys: int
    bottleneck: str | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("O_core", "O_total"):
            f = d[key]
            d[key] = float(f)
            d[key + "_exact"] = f"{f.numerator}/{f.denominator}"
        return d


def hubbard_qubits(L: int) -> int:
    """Logical qubits of the Hubbard simulation plus the catalysis and |0> helpers."""
    if L * L % 2:
        raise InvalidConfig("L^2 must be even")
    return 2 * L * L + L * L // 2 + 3


def hubbard_pipeline(L: int, h: int, w: int, d_x: int, d_z: int, d_m: int | None = None,
                     t_magic=None, mu: int | None = None) -> ResourceEstimate:
    if h < 1 or w < 1:
        raise InvalidConfig("h and w must be >= 1")
    n_core = 4 * w * h
    n_2 = hubbard_qubits(L) - n_core
    if n_2 < 0:
        raise InvalidConfig(f"core of {n_core} qubits exceeds the {hubbard_qubits(L)} needed")
    n_tlq = n_core + n_2
    o_total = total_overhead(d_x, d_z, h, w, n_2)
    phys = 2 * d_x * d_z * n_tlq * o_total
    if phys.denominator != 1:
        raise InvalidConfig("physical qubit count is not an integer")
    tag = None
    if t_magic is not None and mu is not None and d_m is not None:
        tag = classify_bottleneck(t_magic, pbc_time(mu, d_m))[0]
    return ResourceEstimate(L, h, w, d_x, d_z, d_m, n_core, n_2, n_tlq,
                            padded_tiles(d_x, d_z, h, w)["S_TRGP"], core_overhead(d_x, d_z, h, w),
                            o_total, int(phys), tag)


# (L, h, w, d_x, d_z, d_m) -> (N_phys, core, cache, O_total as printed)
TABLE1 = [
    ((8, 2, 6, 7, 13, 12), (46472, 48, 115, 1.57)),
    ((8, 6, 6, 7, 13, 12), (63992, 144, 19, 2.16)),
    ((32, 6, 8, 7, 15, 12), (657276, 192, 2371, 1.23)),
    ((32, 14, 18, 7, 15, 12), (812532, 1008, 1555, 1.51)),
]


def table1() -> list:
    return [hubbard_pipeline(*row) for row, _ in TABLE1]


# ---------------------------------------------------------------------------
# distance selection

def routing_area(d_x: int, d_z: int, h: int, w: int) -> int:
    """Full routing area of the core (used as d_x * ell in the timelike budget)."""
    return full_area(d_x, d_z, h, w) - 4 * w * h * d_x * d_z


def full_area(d_x: int, d_z: int, h: int, w: int) -> int:
    return (d_x + 2 + h * (3 * d_x + 1)) * (d_x + 2 + w * (2 * d_z + d_x + 1))


def budget_terms(mu, p, d_x, d_z, d_m, h, w, n_tlq) -> tuple:
    """Left-hand sides of the three budget inequalities (each must be < delta / 3)."""
    a, b = TIMELIKE
    t1 = a * mu * routing_area(d_x, d_z, h, w) * (b * p) ** ((d_m + 1) / 2)
    a, b = SPACELIKE_Z
    t2 = a * mu * n_tlq * d_m * d_x * (b * p) ** ((d_z + 1) / 2)
    a, b = SPACELIKE_X
    t3 = a * mu * d_m * full_area(d_x, d_z, h, w) / d_x * (b * p) ** ((d_x + 1) / 2)
    return t1, t2, t3


def select_distances(mu: float, p: float, delta: float, h: int, w: int, L: int,
                     cap: int = DISTANCE_CAP, max_dm: int = 10_000) -> tuple:
    """Smallest odd (d_x, d_z) and d_m meeting all three budgets.

    Each quantity is raised to the least value meeting its own inequality
    given the others, starting from (3, 3, 1), until nothing changes.  Every
    left-hand side grows with the other two parameters, so this converges to
    the least joint solution.
    """
    for base in (TIMELIKE, SPACELIKE_Z, SPACELIKE_X):
        if base[1] * p >= 1:
            raise BudgetInfeasible("noise above the fitted threshold")
    n_tlq = hubbard_qubits(L)
    lim = delta / 3
    d_x, d_z, d_m = 3, 3, 1
    for _ in range(10_000):
        old = (d_x, d_z, d_m)
        while budget_terms(mu, p, d_x, d_z, d_m, h, w, n_tlq)[0] >= lim:
            d_m += 1
            if d_m > max_dm:
                raise BudgetInfeasible("d_m exceeds the search cap")
        while budget_terms(mu, p, d_x, d_z, d_m, h, w, n_tlq)[1] >= lim:
            d_z += 2
            if d_z > cap:
                raise BudgetInfeasible(f"d_z exceeds the cap {cap}")
        while budget_terms(mu, p, d_x, d_z, d_m, h, w, n_tlq)[2] >= lim:
            d_x += 2
            if d_x > cap:
                raise BudgetInfeasible(f"d_x exceeds the cap {cap}")
        if (d_x, d_z, d_m) == old:
            return d_x, d_z, d_m
    raise BudgetInfeasible("distance iteration did not settle")


# ---------------------------------------------------------------------------
# twist-free measurement costs

def twist_free_cost(paulis, d_m: int) -> dict:
    """Rounds and extra logical qubits for measuring ``paulis`` without twists.

    A Pauli with Y terms takes two surgery steps; XZ-Paulis take one.  The
    |0> ancilla is needed for any Y-containing Pauli and the reusable |Y>
    ancilla only when some Pauli has an odd Y count.
    """
    rounds, any_y, odd_y, y_meas = 0, False, False, 0
    for p in paulis:
        if isinstance(p, str):
            p = PauliOperator.from_string(p)
        y = p.y_count
        if y:
            any_y = True
            odd_y |= bool(y % 2)
            y_meas += 1
            rounds += 2 * (d_m + 1)
        else:
            rounds += d_m + 1
    extra = 2 if odd_y else (1 if any_y else 0)
    return {"rounds": rounds, "extra_qubits": extra, "y_measurements": y_meas}


def twist_free_failure(P: float) -> float:
    """Either of the two surgery steps fails (and not both)."""
    return 2 * P * (1 - P)



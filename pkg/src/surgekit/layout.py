"""Rotated surface-code patches, the X(x)X merge layout and its circuit.

Geometry.  Data qubits sit on integer sites ``(x, y)`` with ``y`` growing
downwards.  A plaquette ``(cx, cy)`` touches the corners
NW=(cx,cy), NE=(cx+1,cy), SW=(cx,cy+1), SE=(cx+1,cy+1) that exist.  Its type
follows a global checkerboard (X when cx+cy is even).  Weight-two plaquettes
on the left/right edges are kept only if Z-type and on the top/bottom edges
only if X-type.  A patch is ``d_z`` columns wide and ``d_x`` rows tall, so the
logical Z is a row and the logical X a column.

For the merge, ``ell`` routing columns separate the left patch from the right
one; the merged patch simply covers all ``2 d_z + ell`` columns.
"""
from dataclasses import dataclass, field
import json

from .errors import InvalidDistance, InvalidLayout

# corner offsets in CNOT-layer order (hook errors end up perpendicular to the
# logical operator they could otherwise shorten)
X_ORDER = ((0, 0), (1, 0), (0, 1), (1, 1))  # NW NE SW SE
Z_ORDER = ((0, 0), (0, 1), (1, 0), (1, 1))  # NW SW NE SE


def plaquette_type(cx: int, cy: int) -> str:
    return "X" if (cx + cy) % 2 == 0 else "Z"


@dataclass(frozen=True)
class Check:
    plaquette: tuple
    kind: str
    # support in CNOT-layer order; None marks an unused layer
    schedule: tuple

    @property
    def support(self) -> tuple:
        return tuple(q for q in self.schedule if q is not None)

    @property
    def weight(self) -> int:
        return len(self.support)


def _rect_checks(x0: int, width: int, height: int) -> list:
    sites = {(x, y) for x in range(x0, x0 + width) for y in range(height)}
    checks = []
    for cx in range(x0 - 1, x0 + width):
        for cy in range(-1, height):
            kind = plaquette_type(cx, cy)
            lr = cx in (x0 - 1, x0 + width - 1)
            tb = cy in (-1, height - 1)
            if lr and tb:
                continue
            if lr and kind != "Z":
                continue
            if tb and kind != "X":
                continue
            order = X_ORDER if kind == "X" else Z_ORDER
            sched = tuple((cx + dx, cy + dy) if (cx + dx, cy + dy) in sites else None for dx, dy in order)
            if sum(s is not None for s in sched) < 2:
                continue
            checks.append(Check((cx, cy), kind, sched))
    return checks


@dataclass(frozen=True)
class Patch:
    d_x: int
    d_z: int
    x0: int = 0

    def __post_init__(self):
        for d in (self.d_x, self.d_z):
            if not isinstance(d, int) or d < 3 or d % 2 == 0:
                raise InvalidDistance(f"distance {d} must be an odd integer >= 3")

    @property
    def width(self) -> int:
        return self.d_z

    @property
    def height(self) -> int:
        return self.d_x

    @property
    def data(self) -> list:
        return [(x, y) for y in range(self.height) for x in range(self.x0, self.x0 + self.width)]

    @property
    def checks(self) -> list:
        return _rect_checks(self.x0, self.width, self.height)

    @property
    def x_checks(self) -> list:
        return [c for c in self.checks if c.kind == "X"]

    @property
    def z_checks(self) -> list:
        return [c for c in self.checks if c.kind == "Z"]

    @property
    def logical_x(self) -> list:
        """A column of X (weight d_x)."""
        return [(self.x0, y) for y in range(self.height)]

    @property
    def logical_z(self) -> list:
        """A row of Z (weight d_z)."""
        return [(x, 0) for x in range(self.x0, self.x0 + self.width)]


def build_patch(d_x: int, d_z: int, x0: int = 0) -> Patch:
    return Patch(d_x, d_z, x0)


@dataclass(frozen=True)
class SurgeryLayout:
    d_x: int
    d_z: int
    ell: int
    r: int
    d_m: int

    def __post_init__(self):
        Patch(self.d_x, self.d_z)
        if self.ell < 1:
            raise InvalidLayout("routing width must be at least one column")
        if self.r < 1 or self.d_m < 1:
            raise InvalidLayout("need r >= 1 and d_m >= 1")

    @property
    def left(self) -> Patch:
        return Patch(self.d_x, self.d_z, 0)

    @property
    def right(self) -> Patch:
        return Patch(self.d_x, self.d_z, self.d_z + self.ell)

    @property
    def merged_width(self) -> int:
        return 2 * self.d_z + self.ell

    @property
    def routing(self) -> list:
        return [(x, y) for y in range(self.d_x) for x in range(self.d_z, self.d_z + self.ell)]

    @property
    def data(self) -> list:
        """All data sites, row-major over the merged footprint."""
        return [(x, y) for y in range(self.d_x) for x in range(self.merged_width)]

    @property
    def patch_data(self) -> list:
        rs = set(self.routing)
        return [q for q in self.data if q not in rs]

    @property
    def split_checks(self) -> list:
        return self.left.checks + self.right.checks

    @property
    def merged_checks(self) -> list:
        return _rect_checks(0, self.merged_width, self.d_x)

    @property
    def parity_checks(self) -> list:
        """Merged X checks touching routing data; their product is X_L X_R."""
        rs = set(self.routing)
        return [c for c in self.merged_checks if c.kind == "X" and rs & set(c.support)]

    @property
    def plaquettes(self) -> list:
        seen = {}
        for c in self.split_checks + self.merged_checks:
            seen.setdefault(c.plaquette, c.kind)
        return sorted(seen, key=lambda p: (p[1], p[0]))

    @property
    def seam_boundary(self) -> list:
        """Data columns of the two patches facing the routing region."""
        xl, xr = self.d_z - 1, self.d_z + self.ell
        return [(x, y) for x in (xl, xr) for y in range(self.d_x)]

    @property
    def rounds(self) -> int:
        return self.r + self.d_m

    def phase_checks(self, rnd: int) -> list:
        return self.split_checks if rnd <= self.r or rnd > self.rounds else self.merged_checks

    def to_json(self) -> dict:
        return {
            "d_x": self.d_x, "d_z": self.d_z, "ell": self.ell, "r": self.r, "d_m": self.d_m,
            "data": self.data,
            "routing": self.routing,
            "split_checks": [[c.plaquette, c.kind, c.support] for c in self.split_checks],
            "merged_checks": [[c.plaquette, c.kind, c.support] for c in self.merged_checks],
            "parity": [c.plaquette for c in self.parity_checks],
        }


def build_xx_surgery(d_x: int, d_z: int, ell: int, r: int, d_m: int) -> SurgeryLayout:
    return SurgeryLayout(d_x, d_z, ell, r, d_m)


# ---------------------------------------------------------------------------
# circuit

KINDS = ("1q-gate", "2q-gate", "prep-0", "prep-+", "meas-Z", "meas-X", "idle")
STEPS_PER_ROUND = 6


@dataclass(frozen=True)
class Location:
    kind: str
    qubits: tuple
    round: int
    step: int
    perfect: bool = False
    meas: int = -1  # measurement record index for meas-* locations


@dataclass
class Circuit:
    layout: SurgeryLayout
    n_qubits: int
    data_index: dict
    anc_index: dict
    locations: list = field(default_factory=list)
    # measurement id -> ("check", plaquette, round) or ("data", site, round)
    measurements: list = field(default_factory=list)
    n_steps: int = 0

    def meas_of(self, plaquette, rnd):
        return self._check_meas[(plaquette, rnd)]

    def steps(self):
        """Locations grouped by global time step."""
        out = [[] for _ in range(self.n_steps)]
        for i, loc in enumerate(self.locations):
            out[loc.step].append(i)
        return out

    def to_json(self) -> str:
        locs = [[l.kind, list(l.qubits), l.round, l.step, l.perfect, l.meas] for l in self.locations]
        return json.dumps({"layout": self.layout.to_json(), "n_qubits": self.n_qubits, "locations": locs})


def build_circuit(layout: SurgeryLayout) -> Circuit:
    """Syndrome extraction for rounds 1..r+d_m, the split, and a final perfect round."""
    data_index = {q: i for i, q in enumerate(layout.data)}
    anc_index = {p: len(data_index) + i for i, p in enumerate(layout.plaquettes)}
    circ = Circuit(layout, len(data_index) + len(anc_index), data_index, anc_index)
    circ._check_meas = {}
    patch = [data_index[q] for q in layout.patch_data]
    routing = [data_index[q] for q in layout.routing]
    step = 0

    def add(kind, qubits, rnd, st, perfect, meas=-1):
        circ.locations.append(Location(kind, tuple(qubits), rnd, st, perfect, meas))

    final = layout.rounds + 1
    for rnd in range(1, final + 1):
        perfect = rnd == final
        checks = layout.phase_checks(rnd)
        merged = layout.r < rnd <= layout.rounds
        active_data = patch + (routing if merged else [])
        anc = [anc_index[c.plaquette] for c in checks]
        # prep
        for c in checks:
            add("prep-+" if c.kind == "X" else "prep-0", [anc_index[c.plaquette]], rnd, step, perfect)
        if rnd == layout.r + 1:
            for q in routing:
                add("prep-0", [q], rnd, step, perfect)
        step += 1
        # four CNOT layers
        for layer in range(4):
            busy = set()
            for c in checks:
                site = c.schedule[layer]
                if site is None:
                    continue
                a, d = anc_index[c.plaquette], data_index[site]
                pair = (a, d) if c.kind == "X" else (d, a)
                add("2q-gate", pair, rnd, step, perfect)
                busy.update(pair)
            for q in active_data + anc:
                if q not in busy:
                    add("idle", [q], rnd, step, perfect)
            step += 1
        # measure ancillas while data idle once
        for c in checks:
            mid = len(circ.measurements)
            circ.measurements.append(("check", c.plaquette, rnd))
            circ._check_meas[(c.plaquette, rnd)] = mid
            add("meas-X" if c.kind == "X" else "meas-Z", [anc_index[c.plaquette]], rnd, step, perfect, mid)
        for q in active_data:
            add("idle", [q], rnd, step, perfect)
        step += 1
        if rnd == layout.rounds:
            # split: read out the routing columns in Z
            for q, site in zip(routing, layout.routing):
                mid = len(circ.measurements)
                circ.measurements.append(("data", site, rnd))
                add("meas-Z", [q], rnd, step, False, mid)
            for q in patch:
                add("idle", [q], rnd, step, False)
            step += 1
    circ.n_steps = step
    return circ


# ---------------------------------------------------------------------------
# detectors and observables


@dataclass
class DetectorModel:
    """Detectors as XORs of measurement records, tagged with metadata."""

    records: list  # list of tuples of measurement ids
    info: list  # list of dicts: kind ('X'/'Z'), plaquette, round, parity flag
    parity_records: tuple  # measurement ids whose XOR is the raw parity s_par

    def index(self):
        return {(d["kind"], d["plaquette"], d["round"]): i for i, d in enumerate(self.info)}


def build_detectors(circ: Circuit) -> DetectorModel:
    """Compare each check with its previous value.

    Patch checks are measured in every round (their merged support only grows
    into the |0> routing columns).  Parity checks start with a random value at
    round r+1, so their first detector is at r+2.  Z checks that touch the
    routing region close with the Z readout of those columns.
    """
    lay = circ.layout
    r, last = lay.r, lay.rounds
    final = last + 1
    parity = {c.plaquette for c in lay.parity_checks}
    split = {c.plaquette: c for c in lay.split_checks}
    merged = {c.plaquette: c for c in lay.merged_checks}
    if set(split) - set(merged):
        raise InvalidLayout("patch check missing from the merged patch")
    routing = set(lay.routing)
    readout = {m[1]: i for i, m in enumerate(circ.measurements) if m[0] == "data"}
    records, info = [], []

    def emit(kind, plaq, rnd, recs):
        records.append(tuple(recs))
        info.append({"kind": kind, "plaquette": plaq, "round": rnd, "parity": plaq in parity})

    for plaq in lay.plaquettes:
        kind = merged[plaq].kind
        m = lambda t: circ.meas_of(plaq, t)  # noqa: E731
        closing = tuple(readout[q] for q in merged[plaq].support if q in routing) if kind == "Z" else ()
        if plaq in split:
            emit(kind, plaq, 1, (m(1),))
            for t in range(2, last + 1):
                emit(kind, plaq, t, (m(t), m(t - 1)))
            emit(kind, plaq, final, (m(final), m(last)) + closing)
        elif kind == "X":
            for t in range(r + 2, last + 1):
                emit(kind, plaq, t, (m(t), m(t - 1)))
        else:
            emit(kind, plaq, r + 1, (m(r + 1),))
            for t in range(r + 2, last + 1):
                emit(kind, plaq, t, (m(t), m(t - 1)))
            emit(kind, plaq, final, (m(last),) + closing)
    par = tuple(circ.meas_of(p, r + 1) for p in sorted(parity))
    return DetectorModel(records, info, par)

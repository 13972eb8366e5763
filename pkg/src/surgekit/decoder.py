"""Matching decoder for X⊗X lattice surgery.

The detector error model is obtained by pushing every single circuit fault
through the frame simulator (one fault per shot).  Faults are split by the
type of detector they trigger: Z-type data errors light X-check detectors and
are matched in the *X graph*, which also decides the X⊗X outcome; X-type data
errors light Z-check detectors and are matched in the *Z graph*.

X-graph vertices are the X-check detectors plus virtual vertices:

* ``past``: absorbs everything that happened before the merge. It has zero
  weight edges to every other virtual vertex.
* ``future``: reached from parity detectors of the last merged round.
* ``outer``: ordinary spatial boundary of the patches.
* ``trans(s)``: transition vertex for round ``s <= r``; reached by a pre-merge
  error chain that would have flipped the parity outcome.
* ``par(a)``: the round r+1 parity vertex of plaquette ``a``. These are never
  highlighted; all pairs of them are joined by zero-weight edges.

Each edge carries the probability-aggregated weight, a correction mask over
data qubits, whether crossing it flips the parity outcome, and its class.
Only ``trans``, ``red`` and ``r1r2`` edges flip the parity.
"""
from dataclasses import dataclass, field
import itertools
import json
import math

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .errors import InternalError
from .frame import FrameSimulator, unpack, xor_rows
from .layout import build_circuit, build_detectors
from .matching import min_weight_matching
from .noise import NoiseParams, location_distribution

FLIP_CLASSES = ("transition", "red", "r1r2")
V1_CLASSES = ("r1r2",)
V2_CLASSES = ("transition", "red")
WEIGHT_NOISE = NoiseParams(1e-3, 1.0)


@dataclass
class Edge:
    u: int
    v: int
    prob: float
    mask: int
    flip: bool
    cls: str
    obs: int = 0  # Z-graph only: effect on the X-type observable

    @property
    def weight(self) -> float:
        if self.cls == "virtual":
            return 0.0
        q = min(self.prob, 0.5 - 1e-12)
        return math.log((1 - q) / q)


@dataclass
class FaultTable:
    """Single-fault signatures of a circuit."""
    prob: np.ndarray        # (F,)
    loc: np.ndarray         # (F,)
    label: list
    dets: np.ndarray        # (n_det, F) bool
    obs: np.ndarray         # (F,) raw parity flip
    zmask: list             # final Z frame on patch data, as int masks
    xmask: list
    par_r1: np.ndarray      # (n_par, F) bool, parity records at r+1
    xobs: np.ndarray        # (F,) flip of Z_L Z_R times the routing row-0 readouts


def _mask_ints(bits: np.ndarray) -> list:
    """(rows, F) bool -> list of F ints with bit i = row i."""
    rows, f = bits.shape
    packed = np.packbits(bits.T, axis=1, bitorder="little")
    return [int.from_bytes(packed[i].tobytes(), "little") for i in range(f)]


def enumerate_faults(circuit, detectors, params: NoiseParams) -> FaultTable:
    lay = circuit.layout
    locs, codes, probs, labels = [], [], [], []
    for i, loc in enumerate(circuit.locations):
        if loc.perfect:
            continue
        for c, (e, pr) in enumerate(location_distribution(loc.kind, params)):
            if pr > 0:
                locs.append(i)
                codes.append(c)
                probs.append(pr)
                labels.append(e)
    f = len(locs)
    sim = FrameSimulator(circuit)
    rec, x, z = sim.run((np.array(locs), np.arange(f), np.array(codes)), f, params)
    dets = unpack(xor_rows(rec, detectors.records), f)
    obs = unpack(xor_rows(rec, [detectors.parity_records]), f)[0]
    pd = [circuit.data_index[q] for q in lay.patch_data]
    return FaultTable(xobs=xobs_flips(circuit, rec, x, f),
        prob=np.array(probs), loc=np.array(locs), label=labels, dets=dets, obs=obs,
        zmask=_mask_ints(unpack(z[pd], f)), xmask=_mask_ints(unpack(x[pd], f)),
        par_r1=unpack(rec[list(detectors.parity_records)], f),
    )


@dataclass
class MatchingGraph:
    kind: str                     # "X" or "Z"
    det_ids: list                 # global detector index of each real vertex
    nodes: list                   # descriptor of every vertex
    edges: list
    sinks: list
    node_of: dict
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        self.n_real = len(self.det_ids)
        self.local = {d: i for i, d in enumerate(self.det_ids)}
        self._best = {}
        for k, e in enumerate(self.edges):
            key = (min(e.u, e.v), max(e.u, e.v))
            if key not in self._best or e.weight < self.edges[self._best[key]].weight:
                self._best[key] = k
        n = len(self.nodes)
        self.super_sink = n
        rows, cols, ws = [], [], []
        for (a, b), k in self._best.items():
            rows.append(a)
            cols.append(b)
            ws.append(self.edges[k].weight)
        for s in self.sinks:
            rows.append(s)
            cols.append(n)
            ws.append(0.0)
        # symmetric by construction; sparse addition would drop explicit zeros
        self.csgraph = sp.csr_matrix((ws + ws, (rows + cols, cols + rows)), shape=(n + 1, n + 1))
        self._rows = {}
        self._paths = {}

    @property
    def future(self):
        return self.node_of.get("future")

    def edge_between(self, a: int, b: int) -> Edge | None:
        if b == self.super_sink or a == self.super_sink:
            return None
        k = self._best.get((min(a, b), max(a, b)))
        return None if k is None else self.edges[k]

    def _ensure(self, sources):
        need = [s for s in set(sources) if s not in self._rows]
        if not need:
            return
        if len(self._rows) > 4096:
            self._rows.clear()
            self._paths.clear()
        d, pred = dijkstra(self.csgraph, directed=False, indices=need, return_predecessors=True)
        for i, s in enumerate(need):
            self._rows[s] = (d[i], pred[i])

    def distance(self, a: int, b: int) -> float:
        self._ensure([a])
        return float(self._rows[a][0][b])

    def path(self, a: int, b: int) -> list:
        """Vertices along the shortest path a -> b (inclusive)."""
        self._ensure([a])
        pred = self._rows[a][1]
        out = [b]
        while out[-1] != a:
            p = pred[out[-1]]
            if p < 0:
                raise InternalError("disconnected vertices in matching graph")
            out.append(int(p))
        return out[::-1]

    def path_summary(self, a: int, b: int):
        """(mask, v1 count, v2 count, obs) of the shortest path a -> b."""
        key = (a, b)
        if key not in self._paths:
            mask, v1, v2, obs = 0, 0, 0, 0
            verts = self.path(a, b)
            for s, t in zip(verts, verts[1:]):
                e = self.edge_between(s, t)
                if e is None:
                    continue
                mask ^= e.mask
                v1 += e.cls in V1_CLASSES
                v2 += e.cls in V2_CLASSES
                obs ^= e.obs
            self._paths[key] = (mask, v1, v2, obs)
        return self._paths[key]

    def to_json(self) -> str:
        return json.dumps({
            "kind": self.kind,
            "vertices": [{"id": i, "name": repr(n)} for i, n in enumerate(self.nodes)],
            "sinks": self.sinks,
            "edges": [{"u": e.u, "v": e.v, "weight": e.weight, "prob": e.prob, "mask": hex(e.mask),
                       "flip": e.flip, "class": e.cls, "obs": e.obs} for e in self.edges],
        })


def _classify_x(info, flip, r, d_m, par_r1_node):
    """Target vertex and class for a fault lighting exactly one X detector."""
    rnd, parity = info["round"], info["parity"]
    if flip:
        if rnd <= r:
            return ("trans", rnd), "transition"
        if not parity and rnd == r + 1 and par_r1_node is not None:
            return par_r1_node, "transition"
        if not parity and rnd == r + 2 and par_r1_node is not None:
            return par_r1_node, "red"
        if parity and rnd == r + 2:
            return ("par", info["plaquette"]), "r1r2"
        return None, None
    if parity and rnd == r + d_m:
        return ("future",), "future"
    return ("outer",), "boundary"


def build_matching_graph(layout, params: NoiseParams | None = None, kind: str = "X",
                         faults: FaultTable | None = None, circuit=None, detectors=None,
                         drop_r1_parity: bool = False) -> MatchingGraph:
    """Matching graph for one check type.

    With ``params.p == 0`` the weights are taken from a nominal p (they only
    matter when something is highlighted, which never happens without noise).
    ``drop_r1_parity`` folds every round r+1 parity vertex into ``past``;
    they are pairwise joined at zero cost anyway, so decoding is unchanged.
    """
    params = params or WEIGHT_NOISE
    if params.p == 0:
        params = NoiseParams(WEIGHT_NOISE.p, params.eta)
    circuit = circuit or build_circuit(layout)
    detectors = detectors or build_detectors(circuit)
    faults = faults or enumerate_faults(circuit, detectors, params)
    r, d_m = layout.r, layout.d_m
    det_ids = [i for i, inf in enumerate(detectors.info) if inf["kind"] == kind]
    nodes = [("det", detectors.info[i]["plaquette"], detectors.info[i]["round"]) for i in det_ids]
    node_of = {}

    def virtual(name):
        key = name if len(name) > 1 else name[0]
        if key not in node_of:
            node_of[key] = len(nodes)
            nodes.append(name)
        return node_of[key]

    if kind == "X":
        for name in [("past",), ("future",), ("outer",)]:
            virtual(name)
        for s in range(1, r + 1):
            virtual(("trans", s))
        par_plaqs = sorted(c.plaquette for c in layout.parity_checks)
        for a in par_plaqs:
            virtual(("par", a))
    else:
        virtual(("outer",))
        par_plaqs = []
    sub = faults.dets[det_ids]
    masks = faults.zmask if kind == "X" else faults.xmask
    stats = {"faults": len(faults.prob), "undetected_logical": 0.0, "unexpected": 0,
             "hyperedges": 0, "undecomposed": 0, "mask_conflicts": 0, "obs_conflicts": 0}
    acc = {}  # (u, v, flip) -> Edge
    hyper = []

    def add(u, v, prob, mask, flip, cls, obs=0):
        key = (min(u, v), max(u, v), flip)
        if key in acc:
            e = acc[key]
            if e.obs != obs:
                stats["obs_conflicts"] += 1
            if e.mask != mask:
                stats["mask_conflicts"] += 1
            e.prob += prob
        else:
            acc[key] = Edge(u, v, prob, mask, flip, cls, obs)

    cols = np.flatnonzero(sub.any(axis=0))
    silent = ~sub.any(axis=0)
    if kind == "X":
        stats["undetected_logical"] = float(faults.prob[silent & faults.obs].sum())
    for f in cols:
        fired = [int(d) for d in np.flatnonzero(sub[:, f])]
        pr, mask = float(faults.prob[f]), masks[f]
        flip = bool(faults.obs[f]) if kind == "X" else False
        obs = int(faults.xobs[f]) if kind == "Z" else 0
        if len(fired) == 1:
            d = fired[0]
            if kind == "X":
                pr1 = np.flatnonzero(faults.par_r1[:, f])
                pnode = ("par", par_plaqs[pr1[0]]) if pr1.size else None
                target, cls = _classify_x(detectors.info[det_ids[d]], flip, r, d_m, pnode)
                if target is None:
                    stats["unexpected"] += 1
                    continue
                add(d, virtual(target), pr, mask, cls in FLIP_CLASSES, cls)
            else:
                add(d, node_of["outer"], pr, mask, False, "boundary", obs)
        elif len(fired) == 2:
            if flip:
                stats["unexpected"] += 1
                continue
            a, b = fired
            same_round = nodes[a][2] == nodes[b][2]
            add(a, b, pr, mask, False, "normal" if same_round else "spacetime", obs)
        else:
            hyper.append((tuple(fired), pr, flip))
    # decompose hyperedges into existing edges (probability only)
    simple = {}
    for (a, b, fl), e in acc.items():
        simple.setdefault((a, b), e)
    boundary_of = {}
    for (a, b), e in simple.items():
        for x, y in ((a, b), (b, a)):
            if x < len(det_ids) and y >= len(det_ids):
                if x not in boundary_of or e.prob > boundary_of[x].prob:
                    boundary_of[x] = e
    for fired, pr, flip in hyper:
        stats["hyperedges"] += 1
        parts = _decompose(fired, simple, boundary_of)
        if parts is None:
            stats["undecomposed"] += 1
            continue
        for e in parts:
            e.prob += pr
    edges = list(acc.values())
    if kind == "X":
        past = node_of["past"]
        for name, idx in list(node_of.items()):
            if idx != past and idx >= len(det_ids):
                edges.append(Edge(past, idx, 0.0, 0, False, "virtual"))
        pars = [node_of[("par", a)] for a in par_plaqs]
        for a, b in itertools.combinations(pars, 2):
            edges.append(Edge(a, b, 0.0, 0, False, "virtual"))
    sinks = list(range(len(det_ids), len(nodes)))
    if kind == "X":
        sinks = [s for s in sinks if s != node_of["future"]] + [node_of["future"]]
    graph = MatchingGraph(kind, det_ids, nodes, edges, sinks, node_of, stats)
    return _drop_r1_parity(graph) if drop_r1_parity and kind == "X" else graph


def _drop_r1_parity(g: MatchingGraph) -> MatchingGraph:
    """Remove the round r+1 parity vertices, re-homing their edges to ``past``.

    Parallel edges are kept separately (the graph uses the cheapest), which is
    what the zero-weight par-par and par-past edges gave before.
    """
    past = g.node_of["past"]
    keep = [i for i, n in enumerate(g.nodes) if n[0] != "par"]
    new = {old: k for k, old in enumerate(keep)}
    remap = lambda i: new[i] if i in new else new[past]  # noqa: E731
    edges = []
    for e in g.edges:
        u, v = remap(e.u), remap(e.v)
        if u != v:
            edges.append(Edge(u, v, e.prob, e.mask, e.flip, e.cls, e.obs))
    node_of = {k: new[i] for k, i in g.node_of.items() if i in new}
    sinks = [new[s] for s in g.sinks if s in new]
    return MatchingGraph(g.kind, g.det_ids, [g.nodes[i] for i in keep], edges, sinks, node_of,
                         dict(g.stats))


def _decompose(fired, simple, boundary_of):
    """Split a multi-detector signature into known edges, or None."""
    fired = list(fired)
    if len(fired) > 6:
        return None

    def rec(rest):
        if not rest:
            return []
        a = rest[0]
        for j in range(1, len(rest)):
            b = rest[j]
            e = simple.get((min(a, b), max(a, b)))
            if e is not None:
                sub = rec(rest[1:j] + rest[j + 1:])
                if sub is not None:
                    return [e] + sub
        if a in boundary_of:
            sub = rec(rest[1:])
            if sub is not None:
                return [boundary_of[a]] + sub
        return None

    return rec(fired)


@dataclass
class DecodeResult:
    correction: int
    corrected_parity: int
    v1: int
    v2: int
    weight: float
    pairs: tuple
    obs: int = 0


def decode(graph: MatchingGraph, fired, s_par: int = 0) -> DecodeResult:
    """Match the fired detectors (global indices) of ``graph``'s type."""
    hl = sorted(graph.local[d] for d in fired if d in graph.local)
    fut = graph.future
    if fut is not None and len(hl) % 2:
        hl.append(fut)
    if not hl:
        return DecodeResult(0, int(s_par), 0, 0, 0.0, ())
    k = len(hl)
    graph._ensure(hl)
    dist = np.empty((k, k))
    for i, a in enumerate(hl):
        dist[i] = graph._rows[a][0][hl]
    bd = np.array([graph._rows[a][0][graph.super_sink] for a in hl])
    total, pairs = min_weight_matching(dist, bd)
    mask, v1, v2, obs = 0, 0, 0, 0
    for i, j in pairs:
        b = graph.super_sink if j is None else hl[j]
        m, a1, a2, o = graph.path_summary(hl[i], b)
        mask ^= m
        v1 += a1
        v2 += a2
        obs ^= o
    return DecodeResult(mask, int(s_par) ^ ((v1 + v2) & 1), v1, v2, total, pairs, obs)


def logical_masks(layout) -> dict:
    """Int masks over ``layout.patch_data`` for the logical supports."""
    pos = {q: i for i, q in enumerate(layout.patch_data)}

    def m(sites):
        return sum(1 << pos[q] for q in sites)

    return {"xL": m(layout.left.logical_x), "xR": m(layout.right.logical_x),
            "zL": m(layout.left.logical_z), "zR": m(layout.right.logical_z)}


def _odd(x: int) -> int:
    return x.bit_count() & 1


def failure_bits(masks: dict, zres: int, parity_error: int, xobs_error: int) -> tuple:
    """(b_ZL, b_tl, b_ZR, b_X).

    Z-type failures are read from the residual Z frame on each patch.  The
    merge only preserves Z_L Z_R (times the routing readouts on the same
    row), so the X-type failure is the flip of that product.
    """
    b_zl = _odd(zres & masks["xL"])
    b_zr = _odd(zres & masks["xR"])
    return b_zl, int(parity_error), b_zr, int(xobs_error)


def xobs_rows(circuit) -> tuple:
    """Qubits and readout records whose X flips change the X-type observable."""
    lay = circuit.layout
    qubits = [circuit.data_index[q] for q in lay.left.logical_z + lay.right.logical_z]
    row = set(lay.left.logical_z) | set(lay.right.logical_z)
    ys = {y for _, y in row}
    recs = [i for i, m in enumerate(circuit.measurements)
            if m[0] == "data" and m[1] in set(lay.routing) and m[1][1] in ys]
    return qubits, recs


def xobs_flips(circuit, rec, x, shots) -> np.ndarray:
    qubits, recs = xobs_rows(circuit)
    return unpack(xor_rows(np.concatenate([x, rec]), [qubits + [len(x) + i for i in recs]]), shots)[0]

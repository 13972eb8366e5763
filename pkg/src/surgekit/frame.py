"""Bit-packed Pauli-frame simulation of a lattice-surgery circuit.

Shots are packed 64 to a word.  The frame records how each shot deviates from
the noiseless reference, so measurement records here are flip bits.  Every
detector and observable used downstream is deterministic in the noiseless
circuit, so no reference sample or frame randomisation is needed.
"""
import numpy as np

from .noise import error_bits, location_distribution, NoiseParams


def _words(shots: int) -> int:
    return (shots + 63) // 64


def unpack(packed: np.ndarray, shots: int) -> np.ndarray:
    """(rows, words) uint64 -> (rows, shots) bool."""
    b = np.unpackbits(packed.view(np.uint8).reshape(packed.shape[0], -1), axis=1, bitorder="little")
    return b[:, :shots].astype(bool)


def xor_rows(packed: np.ndarray, groups) -> np.ndarray:
    """XOR of ``packed`` rows for each index group."""
    out = np.zeros((len(groups), packed.shape[1]), dtype=np.uint64)
    for i, g in enumerate(groups):
        if len(g):
            out[i] = np.bitwise_xor.reduce(packed[list(g)], axis=0)
    return out


class FrameSimulator:
    def __init__(self, circuit):
        self.circuit = circuit
        self.n = circuit.n_qubits
        self.n_meas = len(circuit.measurements)
        steps = [[] for _ in range(circuit.n_steps)]
        for i, loc in enumerate(circuit.locations):
            steps[loc.step].append(i)
        self.loc_step = np.array([l.step for l in circuit.locations])
        self.loc_q = np.full((len(circuit.locations), 2), -1, dtype=np.int64)
        for i, l in enumerate(circuit.locations):
            self.loc_q[i, : len(l.qubits)] = l.qubits
        self.loc_meas = np.array([l.meas for l in circuit.locations])
        self.plan = []
        for ids in steps:
            resets, ctrl, tgt, mz, mzid, mx, mxid = [], [], [], [], [], [], []
            for i in ids:
                loc = circuit.locations[i]
                if loc.kind in ("prep-0", "prep-+"):
                    resets.append(loc.qubits[0])
                elif loc.kind == "2q-gate":
                    ctrl.append(loc.qubits[0])
                    tgt.append(loc.qubits[1])
                elif loc.kind == "meas-Z":
                    mz.append(loc.qubits[0])
                    mzid.append(loc.meas)
                elif loc.kind == "meas-X":
                    mx.append(loc.qubits[0])
                    mxid.append(loc.meas)
            arr = lambda v: np.array(v, dtype=np.int64)  # noqa: E731
            self.plan.append((arr(resets), arr(ctrl), arr(tgt), arr(mz), arr(mzid), arr(mx), arr(mxid)))

    def _global_table(self, params):
        """Flattened error table over all kinds plus a per-location offset."""
        kinds = sorted({l.kind for l in self.circuit.locations})
        offset, gx, gz, gf = {}, [], [], []
        for k in kinds:
            offset[k] = len(gf)
            for e, _ in location_distribution(k, params):
                xs, zs, flip = error_bits(e)
                gx.append((list(xs) + [0, 0])[:2])
                gz.append((list(zs) + [0, 0])[:2])
                gf.append(flip)
        loc_off = np.array([offset[l.kind] for l in self.circuit.locations], dtype=np.int64)
        return loc_off, np.array(gx, bool), np.array(gz, bool), np.array(gf, bool)

    def run(self, events, shots: int, params: NoiseParams | None = None):
        """Propagate the given faults.

        ``events`` is (location ids, shot ids, codes); codes index the error
        list of each location kind (as produced by ``noise.sample_events``).
        Only the structure of the error lists matters, so ``params`` may be
        omitted.  Returns (record flips, final x frame, final z frame), packed.
        """
        w = _words(shots)
        x = np.zeros((self.n, w), dtype=np.uint64)
        z = np.zeros((self.n, w), dtype=np.uint64)
        rec = np.zeros((self.n_meas, w), dtype=np.uint64)
        loc_off, gx, gz, gf = self._global_table(params or NoiseParams(0.01, 2.0))
        locs, shot_ids, codes = (np.asarray(a, dtype=np.int64) for a in events)
        order = np.argsort(self.loc_step[locs], kind="stable")
        locs, shot_ids, codes = locs[order], shot_ids[order], codes[order]
        bounds = np.searchsorted(self.loc_step[locs], np.arange(len(self.plan) + 1))
        word = shot_ids >> 6
        bit = np.left_shift(np.uint64(1), (shot_ids & 63).astype(np.uint64))
        g = loc_off[locs] + codes
        for s, (resets, ctrl, tgt, mz, mzid, mx, mxid) in enumerate(self.plan):
            if resets.size:
                x[resets] = 0
                z[resets] = 0
            if ctrl.size:
                x[tgt] ^= x[ctrl]
                z[ctrl] ^= z[tgt]
            if mz.size:
                rec[mzid] = x[mz]
            if mx.size:
                rec[mxid] = z[mx]
            lo, hi = bounds[s], bounds[s + 1]
            if lo == hi:
                continue
            sl = slice(lo, hi)
            gg, ll, ww, bb = g[sl], locs[sl], word[sl], bit[sl]
            f = gf[gg]
            if f.any():
                np.bitwise_xor.at(rec, (self.loc_meas[ll[f]], ww[f]), bb[f])
            for k in (0, 1):
                q = self.loc_q[ll, k]
                mx_ = gx[gg, k] & (q >= 0)
                if mx_.any():
                    np.bitwise_xor.at(x, (q[mx_], ww[mx_]), bb[mx_])
                mz_ = gz[gg, k] & (q >= 0)
                if mz_.any():
                    np.bitwise_xor.at(z, (q[mz_], ww[mz_]), bb[mz_])
        return rec, x, z


# ---------------------------------------------------------------------------
# tableau reference (slow, exact; used to validate the frame simulator)


def prepare_codestate(layout, rng, minus_left: bool = False, minus_right: bool = False):
    """Tableau with both patches in logical |+> (or |->), routing in |0>."""
    from . import gf2
    from .pauli import PauliOperator
    from .tableau import Tableau

    data = layout.data
    idx = {q: i for i, q in enumerate(data)}
    n_anc = len(layout.plaquettes)
    t = Tableau.zero(len(data) + n_anc)
    routing = set(layout.routing)
    for q in data:
        if q not in routing:
            t.h(idx[q])
    n = t.n
    zchecks = [c for c in layout.split_checks if c.kind == "Z"]
    syn = []
    for c in zchecks:
        mask = sum(1 << idx[q] for q in c.support)
        syn.append(t.measure_pauli(PauliOperator(0, mask, n), rng))
    h = np.zeros((len(zchecks), len(data)), dtype=np.uint8)
    for i, c in enumerate(zchecks):
        for q in c.support:
            h[i, idx[q]] = 1
    fix = gf2.solve(h, np.array(syn, dtype=np.uint8))
    for j in np.nonzero(fix)[0]:
        t.pauli_gate("X", int(j))
    for flag, patch in ((minus_left, layout.left), (minus_right, layout.right)):
        if flag:
            for q in patch.logical_z:
                t.pauli_gate("Z", idx[q])
    return t


def reference_run(circuit, errors, rng, tableau=None):
    """Execute the circuit on a tableau with the given (location, label) faults.

    Returns (measurement outcomes, final tableau).
    """
    from .pauli import PauliOperator

    t = tableau.copy() if tableau is not None else prepare_codestate(circuit.layout, rng)
    n = t.n
    rec = np.zeros(len(circuit.measurements), dtype=np.uint8)
    by_loc = {}
    for loc, label in errors:
        by_loc.setdefault(loc, []).append(label)
    for ids in circuit.steps():
        locs = [circuit.locations[i] for i in ids]
        for l in locs:
            if l.kind in ("prep-0", "prep-+"):
                q = l.qubits[0]
                if t.measure_z(q, rng):
                    t.pauli_gate("X", q)
                if l.kind == "prep-+":
                    t.h(q)
        for l in locs:
            if l.kind == "2q-gate":
                t.cx(*l.qubits)
        for l in locs:
            if l.kind == "meas-Z":
                rec[l.meas] = t.measure_pauli(PauliOperator(0, 1 << l.qubits[0], n), rng)
            elif l.kind == "meas-X":
                rec[l.meas] = t.measure_pauli(PauliOperator(1 << l.qubits[0], 0, n), rng)
        for i in ids:
            for label in by_loc.get(i, ()):
                l = circuit.locations[i]
                if label == "FLIP":
                    rec[l.meas] ^= 1
                    continue
                for q, c in zip(l.qubits, label):
                    if c != "I":
                        t.pauli_gate(c, q)
    return rec, t

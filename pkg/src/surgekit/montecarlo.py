"""Noisy X⊗X surgery trials, failure classification and ansatz fits."""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
import itertools
import os

import numpy as np
from scipy import stats

from .decoder import (build_matching_graph, decode, enumerate_faults, failure_bits, logical_masks,
                      xobs_flips)
from .errors import InsufficientData, InvalidConfig
from .frame import FrameSimulator, unpack, xor_rows
from .layout import build_circuit, build_detectors, build_xx_surgery
from .noise import NoiseParams, sample_events

CLASSES = [c for c in itertools.product((0, 1), repeat=4) if any(c)]
BATCH = 2048


@dataclass
class TrialConfig:
    d_x: int = 3
    d_z: int = 3
    ell: int = 1
    r: int | None = None        # defaults to d_z
    d_m: int = 3
    p: float = 1e-3
    eta: float = 1.0
    trials: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.r is None:
            self.r = self.d_z
        if self.trials < 1:
            raise InvalidConfig("trials must be >= 1")
        if self.r < 1:
            raise InvalidConfig("r must be >= 1")

    @property
    def noise(self) -> NoiseParams:
        return NoiseParams(self.p, self.eta)

    @classmethod
    def from_dict(cls, d: dict) -> "TrialConfig":
        keys = {"d_x", "d_z", "ell", "r", "d_m", "p", "eta", "trials", "seed"}
        d = dict(d)
        if "l" in d:
            d["ell"] = d.pop("l")
        if "dm" in d:
            d["d_m"] = d.pop("dm")
        if "N" in d:
            d["trials"] = d.pop("N")
        unknown = set(d) - keys
        if unknown:
            raise InvalidConfig(f"unknown config keys {sorted(unknown)}")
        return cls(**d)


@dataclass
class FailureTally:
    counts: dict = field(default_factory=dict)   # 4-bit class -> count
    trials: int = 0

    def add(self, cls, n: int = 1):
        cls = tuple(int(b) for b in cls)
        if any(cls):
            self.counts[cls] = self.counts.get(cls, 0) + n

    def merge(self, other: "FailureTally") -> "FailureTally":
        out = FailureTally(dict(self.counts), self.trials + other.trials)
        for c, n in other.counts.items():
            out.counts[c] = out.counts.get(c, 0) + n
        return out

    def count(self, cls) -> int:
        cls = tuple(cls)
        if not any(cls):
            return self.trials - sum(self.counts.values())
        return self.counts.get(cls, 0)

    def rate(self, cls) -> float:
        return self.count(cls) / self.trials if self.trials else 0.0

    def marginal(self, bit: int) -> int:
        """Trials where failure bit ``bit`` (0..3) is set."""
        return sum(n for c, n in self.counts.items() if c[bit])

    def rows(self, confidence: float = 0.95):
        for cls in [(0, 0, 0, 0)] + CLASSES:
            n = self.count(cls)
            lo, hi = wilson_interval(n, self.trials, confidence)
            yield "".join(map(str, cls)), n, n / self.trials, lo, hi


def wilson_interval(count: int, trials: int, confidence: float = 0.95):
    if trials <= 0 or not 0 <= count <= trials:
        raise InvalidConfig("need 0 <= count <= trials and trials > 0")
    z = stats.norm.ppf(0.5 + confidence / 2)
    ph = count / trials
    den = 1 + z * z / trials
    mid = (ph + z * z / (2 * trials)) / den
    half = z * np.sqrt(ph * (1 - ph) / trials + z * z / (4 * trials * trials)) / den
    lo = 0.0 if count == 0 else max(0.0, mid - half)
    hi = 1.0 if count == trials else min(1.0, mid + half)
    return lo, hi


class SurgeryExperiment:
    """Everything that is shared between batches of one configuration."""

    def __init__(self, config: TrialConfig):
        self.config = config
        self.layout = build_xx_surgery(config.d_x, config.d_z, config.ell, config.r, config.d_m)
        self.circuit = build_circuit(self.layout)
        self.detectors = build_detectors(self.circuit)
        self.sim = FrameSimulator(self.circuit)
        noise = config.noise
        faults = enumerate_faults(self.circuit, self.detectors,
                                  noise if noise.p > 0 else NoiseParams(1e-3, noise.eta))
        kw = dict(faults=faults, circuit=self.circuit, detectors=self.detectors)
        self.gx = build_matching_graph(self.layout, noise, "X", **kw)
        self.gz = build_matching_graph(self.layout, noise, "Z", **kw)
        self.masks = logical_masks(self.layout)
        idx = self.circuit.data_index
        self.col_l = [idx[q] for q in self.layout.left.logical_x]
        self.col_r = [idx[q] for q in self.layout.right.logical_x]
        self.x_rows = np.array(self.gx.det_ids)
        self.z_rows = np.array(self.gz.det_ids)
        self._cx, self._cz = {}, {}

    def _decode_x(self, fired):
        key = tuple(fired)
        if key not in self._cx:
            res = decode(self.gx, fired, 0)
            m = res.correction
            self._cx[key] = (
                (m & self.masks["xL"]).bit_count() & 1,
                (m & self.masks["xR"]).bit_count() & 1,
                (res.v1 + res.v2) & 1,
            )
        return self._cx[key]

    def _decode_z(self, fired):
        key = tuple(fired)
        if key not in self._cz:
            self._cz[key] = decode(self.gz, fired).obs
        return self._cz[key]

    def classify(self, events, shots: int) -> dict:
        """Failure class of every shot with a nonzero class, as {shot: class}."""
        noise = self.config.noise
        rec, x, z = self.sim.run(events, shots, noise)
        dets = unpack(xor_rows(rec, self.detectors.records), shots)
        par = unpack(xor_rows(rec, [self.detectors.parity_records]), shots)[0]
        zl = unpack(xor_rows(z, [self.col_l, self.col_r]), shots)
        xo = xobs_flips(self.circuit, rec, x, shots)
        dx, dz = dets[self.x_rows], dets[self.z_rows]
        hit_x, hit_z = dx.any(axis=0), dz.any(axis=0)
        out = {}
        for s in np.flatnonzero(hit_x | hit_z | par | zl.any(axis=0) | xo):
            cl, cr, fl = self._decode_x(self.x_rows[dx[:, s]]) if hit_x[s] else (0, 0, 0)
            ob = self._decode_z(self.z_rows[dz[:, s]]) if hit_z[s] else 0
            cls = (int(zl[0, s] ^ cl), int(par[s] ^ fl), int(zl[1, s] ^ cr), int(xo[s] ^ ob))
            if any(cls):
                out[int(s)] = cls
        return out

    def run_batch(self, shots: int, rng) -> FailureTally:
        tally = FailureTally(trials=shots)
        if self.config.p == 0:
            return tally
        ev = sample_events(self.circuit, self.config.noise, shots, rng)
        for cls in self.classify(ev, shots).values():
            tally.add(cls)
        return tally


def _batch_plan(config: TrialConfig):
    n = -(-config.trials // BATCH)
    seeds = np.random.SeedSequence(config.seed).spawn(n)
    sizes = [BATCH] * (n - 1) + [config.trials - BATCH * (n - 1)]
    return list(zip(sizes, seeds))


def _worker(args):
    config, chunk = args
    exp = SurgeryExperiment(config)
    tally = FailureTally()
    for size, seed in chunk:
        tally = tally.merge(exp.run_batch(size, np.random.default_rng(seed)))
    return tally


def run_trials(config: TrialConfig, workers: int | None = None,
               experiment: SurgeryExperiment | None = None) -> FailureTally:
    """Tally failure classes over ``config.trials`` shots.

    Batches get independent seeds spawned from ``config.seed`` so the result
    does not depend on the number of workers.
    """
    plan = _batch_plan(config)
    workers = workers or int(os.environ.get("SURGEKIT_THREADS", "1"))
    tally = FailureTally()
    if workers <= 1 or len(plan) == 1:
        exp = experiment or SurgeryExperiment(config)
        for size, seed in plan:
            tally = tally.merge(exp.run_batch(size, np.random.default_rng(seed)))
        return tally
    chunks = [plan[i::workers] for i in range(workers)]
    with ProcessPoolExecutor(workers) as pool:
        for t in pool.map(_worker, [(config, c) for c in chunks if c]):
            tally = tally.merge(t)
    return tally


# ---------------------------------------------------------------------------
# ansatz fits: rate = A * geom * (B p)^((d+1)/2)

@dataclass
class AnsatzFit:
    A: float
    B: float
    exponent: str
    covariance: list            # 2x2 covariance of (A, B)
    log_covariance: list        # 2x2 covariance of (ln A, ln(B p))

    def predict(self, d, p, geom=1.0):
        return self.A * geom * (self.B * p) ** ((np.asarray(d) + 1) / 2)

    def to_dict(self) -> dict:
        return asdict(self)


def fit_ansatz(series, p: float, exponent: str = "d_m", geom=1.0) -> AnsatzFit:
    """Weighted least squares of ln(rate / geom) against (d+1)/2.

    ``series`` holds (d, rate, stderr) triples; ``geom`` is a scalar or one
    geometric factor per point.  Points with zero rate are rejected: callers
    should drop them (they are upper bounds only).
    """
    pts = [tuple(s) for s in series]
    if len(pts) < 3:
        raise InsufficientData("need at least 3 points")
    d = np.array([s[0] for s in pts], float)
    rate = np.array([s[1] for s in pts], float)
    err = np.array([s[2] for s in pts], float)
    if np.any(rate <= 0):
        raise InsufficientData("rates must be positive")
    g = np.broadcast_to(np.asarray(geom, float), d.shape)
    y = np.log(rate / g)
    sig = np.where(err > 0, err / rate, 1.0)
    x = (d + 1) / 2
    X = np.column_stack([np.ones_like(x), x])
    W = 1 / sig ** 2
    XtW = X.T * W
    cov = np.linalg.inv(XtW @ X)
    a, b = cov @ (XtW @ y)
    if np.all(err <= 0):
        # unweighted: scale covariance by the residual variance
        res = y - X @ np.array([a, b])
        dof = max(len(y) - 2, 1)
        cov = cov * float(res @ res) / dof
    A, B = float(np.exp(a)), float(np.exp(b) / p)
    jac = np.diag([A, B])
    return AnsatzFit(A, B, exponent, (jac @ cov @ jac).tolist(), cov.tolist())


# ---------------------------------------------------------------------------
# exhaustive single-fault audit

def single_fault_audit(d_x: int, d_z: int, ell: int, r: int, d_m: int,
                       params: NoiseParams | None = None) -> dict:
    """Decode every single circuit fault and count the failure classes.

    Returns ``{"faults": F, "failures": {class: count}, "noncode": n}`` where
    ``noncode`` counts residual Z frames that violate a patch X check.
    """
    params = params or NoiseParams(1e-3, 100.0)
    lay = build_xx_surgery(d_x, d_z, ell, r, d_m)
    circ = build_circuit(lay)
    dets = build_detectors(circ)
    ft = enumerate_faults(circ, dets, params)
    kw = dict(faults=ft, circuit=circ, detectors=dets)
    gx = build_matching_graph(lay, params, "X", **kw)
    gz = build_matching_graph(lay, params, "Z", **kw)
    masks = logical_masks(lay)
    pos = {q: i for i, q in enumerate(lay.patch_data)}
    xchecks = [sum(1 << pos[q] for q in ch.support)
               for patch in (lay.left, lay.right) for ch in patch.x_checks]
    failures, noncode = {}, 0
    for f in range(len(ft.prob)):
        fired = np.flatnonzero(ft.dets[:, f])
        rx = decode(gx, fired, int(ft.obs[f]))
        rz = decode(gz, fired)
        zres = ft.zmask[f] ^ rx.correction
        noncode += any((zres & m).bit_count() & 1 for m in xchecks)
        cls = failure_bits(masks, zres, rx.corrected_parity, int(ft.xobs[f]) ^ rz.obs)
        if any(cls):
            failures[cls] = failures.get(cls, 0) + 1
    return {"faults": len(ft.prob), "failures": failures, "noncode": noncode}

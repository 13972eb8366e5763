"""Biased circuit-level noise: Z-type faults at rate ~p, X/Y-type at ~p/eta.

Every location is followed by an independent fault drawn from
``location_distribution``; measurement faults flip the recorded bit.
"""
from dataclasses import dataclass
import json

import numpy as np

from .errors import InvalidConfig

_PAULI1 = ("X", "Y", "Z")
_PAULI2 = tuple(a + b for a in "IXYZ" for b in "IXYZ" if a + b != "II")
_ZTYPE2 = ("ZI", "IZ", "ZZ")


@dataclass(frozen=True)
class NoiseParams:
    p: float
    eta: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.p <= 0.1):
            raise InvalidConfig("p must lie in [0, 0.1]")
        if not self.eta >= 1.0:
            raise InvalidConfig("eta must be >= 1")

    @classmethod
    def from_json(cls, text_or_dict) -> "NoiseParams":
        d = json.loads(text_or_dict) if isinstance(text_or_dict, str) else dict(text_or_dict)
        try:
            return cls(float(d["p"]), float(d.get("eta", 1.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidConfig(f"bad noise config: {exc}") from exc


def location_distribution(kind: str, params: NoiseParams) -> list:
    p, eta = params.p, params.eta
    if kind in ("1q-gate", "idle"):
        return [("X", p / (3 * eta)), ("Y", p / (3 * eta)), ("Z", p / 3)]
    if kind == "2q-gate":
        return [(e, p / 15 if e in _ZTYPE2 else p / (15 * eta)) for e in _PAULI2]
    if kind == "prep-0":
        return [("X", 2 * p / (3 * eta))]
    if kind == "prep-+":
        return [("Z", 2 * p / 3)]
    if kind == "meas-Z":
        return [("FLIP", 2 * p / (3 * eta))]
    if kind == "meas-X":
        return [("FLIP", 2 * p / 3)]
    raise InvalidConfig(f"unknown location kind {kind!r}")


def error_bits(error: str):
    """(x bits, z bits, flip) for an error label, one bit per location qubit."""
    if error == "FLIP":
        return (), (), 1
    xs = tuple(int(c in "XY") for c in error)
    zs = tuple(int(c in "ZY") for c in error)
    return xs, zs, 0


def total_error_probability(kind: str, params: NoiseParams) -> float:
    return sum(pr for _, pr in location_distribution(kind, params))


def sample_errors(circuit, params: NoiseParams, rng) -> list:
    """One shot: list of (location id, error label)."""
    ev = sample_events(circuit, params, 1, rng)
    tables = {k: location_distribution(k, params) for k in set(l.kind for l in circuit.locations)}
    return [(int(l), tables[circuit.locations[l].kind][c][0]) for l, _, c in zip(*ev)]


def _distinct_positions(total: int, count: int, rng) -> np.ndarray:
    """``count`` distinct uniform integers in [0, total)."""
    pos = np.unique(rng.integers(0, total, size=count))
    while pos.size < count:
        extra = rng.integers(0, total, size=count - pos.size)
        pos = np.unique(np.concatenate([pos, extra]))
    return pos


def sample_events(circuit, params: NoiseParams, shots: int, rng):
    """Faults for ``shots`` independent shots as parallel arrays.

    Returns (location ids, shot ids, error codes) where the code indexes
    ``location_distribution(kind)``.  For each kind the Bernoulli process over
    (location, shot) pairs is drawn as a binomial count of distinct uniform
    positions, which is exact and cheap when faults are rare.
    """
    locs_by_kind = {}
    for i, loc in enumerate(circuit.locations):
        if not loc.perfect:
            locs_by_kind.setdefault(loc.kind, []).append(i)
    out_l, out_s, out_c = [], [], []
    for kind in sorted(locs_by_kind):
        ids = np.array(locs_by_kind[kind])
        dist = location_distribution(kind, params)
        probs = np.array([pr for _, pr in dist])
        q = probs.sum()
        if q <= 0:
            continue
        total = ids.size * shots
        k = rng.binomial(total, q)
        if k == 0:
            continue
        pos = _distinct_positions(total, k, rng)
        codes = np.searchsorted(np.cumsum(probs / q), rng.random(k), side="right")
        codes = np.minimum(codes, len(probs) - 1)
        out_l.append(ids[pos // shots])
        out_s.append(pos % shots)
        out_c.append(codes)
    if not out_l:
        e = np.zeros(0, dtype=np.int64)
        return e, e.copy(), e.copy()
    return np.concatenate(out_l), np.concatenate(out_s), np.concatenate(out_c)


def expected_error_count(circuit, params: NoiseParams) -> float:
    return sum(total_error_probability(l.kind, params) for l in circuit.locations if not l.perfect)

"""Fault-injection helpers shared by the decoder and acceptance tests."""
import numpy as np

from surgekit.noise import location_distribution


def inject(exp, items):
    """Events for one shot from (location id, error label) pairs."""
    locs, codes = [], []
    for li, label in items:
        labels = [e for e, _ in location_distribution(exp.circuit.locations[li].kind, exp.config.noise)]
        locs.append(li)
        codes.append(labels.index(label))
    return np.array(locs), np.zeros(len(locs), int), np.array(codes)


def meas_location(circuit, plaquette, rnd):
    mid = circuit.meas_of(plaquette, rnd)
    return next(i for i, l in enumerate(circuit.locations) if l.meas == mid)


def data_idle(circuit, site, rnd):
    q = circuit.data_index[site]
    return [i for i, l in enumerate(circuit.locations)
            if l.kind == "idle" and l.qubits == (q,) and l.round == rnd][-1]

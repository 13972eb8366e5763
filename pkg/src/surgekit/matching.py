"""Exact minimum-weight matching with an absorbing boundary.

Given pairwise distances ``dist`` between highlighted vertices and each
vertex's distance ``bdist`` to the (virtual) boundary, find the cheapest way
to pair every vertex either with another vertex or with the boundary.  Small
instances use an exact subset recursion; larger ones reduce to a perfect
matching (each vertex gets a private boundary copy, copies pair freely at
zero cost) solved by networkx's blossom implementation.
"""
from functools import lru_cache

import networkx as nx
import numpy as np

from .errors import InternalError

DP_LIMIT = 12


def _dp(dist, bdist):
    k = len(bdist)

    @lru_cache(maxsize=None)
    def best(mask):
        if mask == 0:
            return 0.0, ()
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        cost, plan = best(rest)
        top = (cost + bdist[i], plan + ((i, None),))
        j_mask = rest
        while j_mask:
            j = (j_mask & -j_mask).bit_length() - 1
            j_mask &= j_mask - 1
            if not np.isfinite(dist[i][j]):
                continue
            c, pl = best(rest & ~(1 << j))
            c += dist[i][j]
            if c < top[0] - 1e-12:
                top = (c, pl + ((i, j),))
        return top

    return best((1 << k) - 1)


def _blossom(dist, bdist):
    k = len(bdist)
    finite = [w for row in dist for w in row if np.isfinite(w)] + [w for w in bdist if np.isfinite(w)]
    big = 1.0 + 2.0 * (max(finite) if finite else 0.0) * (k + 1)
    g = nx.Graph()
    for i in range(k):
        if np.isfinite(bdist[i]):
            g.add_edge(i, ("b", i), weight=big - bdist[i])
        for j in range(i + 1, k):
            if np.isfinite(dist[i][j]):
                g.add_edge(i, j, weight=big - dist[i][j])
            g.add_edge(("b", i), ("b", j), weight=big)
    mate = nx.max_weight_matching(g, maxcardinality=True)
    pairs = []
    total = 0.0
    for a, b in mate:
        if isinstance(a, tuple) and isinstance(b, tuple):
            continue
        if isinstance(a, tuple):
            a, b = b, a
        if isinstance(b, tuple):
            pairs.append((a, None))
            total += bdist[a]
        else:
            pairs.append((min(a, b), max(a, b)))
            total += dist[a][b]
    if sum(1 if j is None else 2 for _, j in pairs) != k:
        raise InternalError("matching left vertices uncovered")
    return total, tuple(pairs)


def min_weight_matching(dist, bdist, method: str = "auto"):
    """Return (total weight, pairs) with pairs (i, j) or (i, None) for boundary."""
    dist = np.asarray(dist, dtype=float)
    bdist = np.asarray(bdist, dtype=float)
    k = len(bdist)
    if k == 0:
        return 0.0, ()
    if method == "dp" or (method == "auto" and k <= DP_LIMIT):
        total, pairs = _dp(tuple(map(tuple, dist)), tuple(bdist))
    else:
        total, pairs = _blossom(dist, bdist)
    if not np.isfinite(total):
        raise InternalError("no finite matching exists")
    return float(total), tuple(sorted(pairs, key=lambda p: p[0]))


def brute_force_matching(dist, bdist):
    """Exhaustive oracle over every pairing (factorial time)."""
    k = len(bdist)
    best = (np.inf, ())

    def rec(left, acc, plan):
        nonlocal best
        if acc >= best[0]:
            return
        if not left:
            best = (acc, plan)
            return
        i, rest = left[0], left[1:]
        rec(rest, acc + bdist[i], plan + ((i, None),))
        for idx, j in enumerate(rest):
            rec(rest[:idx] + rest[idx + 1:], acc + dist[i][j], plan + ((i, j),))

    rec(tuple(range(k)), 0.0, ())
    return best


def all_perfect_matchings(k):
    """Perfect matchings of k (even) vertices without a boundary."""
    if k == 0:
        yield ()
        return
    for j in range(1, k):
        rest = [v for v in range(1, k) if v != j]
        for m in all_perfect_matchings(len(rest)):
            yield ((0, j),) + tuple((rest[a], rest[b]) for a, b in m)


def perfect_matching(dist):
    """Minimum-weight perfect matching without a boundary (k even)."""
    k = len(dist)
    if k % 2:
        raise InternalError("odd number of vertices without a boundary")
    inf = np.full(k, np.inf)
    return min_weight_matching(dist, inf)



import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from surgekit.errors import InternalError
from surgekit.matching import (all_perfect_matchings, brute_force_matching, min_weight_matching,
                               perfect_matching)


def random_instance(rng, k):
    pts = rng.random((k, 2)) * 10
    dist = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    bdist = rng.random(k) * 8
    return dist, bdist


def cost(pairs, dist, bdist):
    return sum(bdist[i] if j is None else dist[i][j] for i, j in pairs)


def test_two_adjacent():
    total, pairs = min_weight_matching([[0, 1.0], [1.0, 0]], [5.0, 5.0])
    assert pairs == ((0, 1),) and total == 1.0


def test_path_graph():
    inf = np.inf
    d = np.array([[0, 1, 4, 5], [1, 0, 3, 4], [4, 3, 0, 1], [5, 4, 1, 0]], float)
    assert perfect_matching(d) == (2.0, ((0, 1), (2, 3)))
    total, pairs = min_weight_matching(d, [inf] * 4)
    assert total == 2.0 and pairs == ((0, 1), (2, 3))


def test_boundary_preferred():
    total, pairs = min_weight_matching([[0, 10.0], [10.0, 0]], [1.0, 2.0])
    assert pairs == ((0, None), (1, None)) and total == 3.0


@pytest.mark.parametrize("method", ["dp", "blossom"])
def test_random_vs_brute_force(method):
    rng = np.random.default_rng(11)
    for _ in range(150):
        k = int(rng.integers(1, 9))
        dist, bdist = random_instance(rng, k)
        total, pairs = min_weight_matching(dist, bdist, method)
        assert total == pytest.approx(brute_force_matching(dist, bdist)[0])
        assert total == pytest.approx(cost(pairs, dist, bdist))
        covered = sorted([i for i, _ in pairs] + [j for _, j in pairs if j is not None])
        assert covered == list(range(k))


@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 10).filter(lambda k: k % 2 == 0))
@settings(max_examples=60, deadline=None)
def test_perfect_vs_enumeration(seed, k):
    rng = np.random.default_rng(seed)
    w = rng.random((k, k))
    w = (w + w.T) / 2
    best = min(sum(w[a][b] for a, b in m) for m in all_perfect_matchings(k))
    assert perfect_matching(w)[0] == pytest.approx(best)


@pytest.mark.parametrize("k, n", [(2, 1), (4, 3), (6, 15), (8, 105)])
def test_perfect_matching_count(k, n):
    assert sum(1 for _ in all_perfect_matchings(k)) == n


def test_infeasible():
    with pytest.raises(InternalError):
        min_weight_matching([[0, np.inf], [np.inf, 0]], [np.inf, np.inf])
    with pytest.raises(InternalError):
        perfect_matching(np.zeros((3, 3)))


def test_blossom_large_matches_dp():
    rng = np.random.default_rng(5)
    for _ in range(10):
        dist, bdist = random_instance(rng, 12)
        a = min_weight_matching(dist, bdist, "dp")[0]
        b = min_weight_matching(dist, bdist, "blossom")[0]
        assert a == pytest.approx(b)

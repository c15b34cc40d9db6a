import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

import oracles
from levelset.exceptions import EmptyCloud, InputError, InvalidRadius, KTooLarge
from levelset.geometry import (
    NeighborIndex,
    build_index,
    check_cloud,
    kth_neighbor_distance,
    radius_neighbors,
)

X013 = [[0.0], [1.0], [3.0]]


@pytest.fixture
def idx013():
    return build_index(X013)


@pytest.mark.parametrize("k,expected", [(1, 0.0), (2, 1.0), (3, 3.0)])
def test_kth_examples(idx013, k, expected):
    assert kth_neighbor_distance(idx013, [0.0], k) == expected


@pytest.mark.parametrize("q,eps,expected", [(0.0, 1.0, [0, 1]), (0.0, 0.5, [0]), (2.0, 1.0, [1, 2])])
def test_radius_examples(idx013, q, eps, expected):
    assert radius_neighbors(idx013, [q], eps).tolist() == expected


def test_errors(idx013):
    with pytest.raises(EmptyCloud):
        build_index(np.empty((0, 2)))
    with pytest.raises(KTooLarge):
        kth_neighbor_distance(idx013, [0.0], 4)
    with pytest.raises(InvalidRadius):
        radius_neighbors(idx013, [0.0], -0.1)
    with pytest.raises(InputError):
        check_cloud([[0.0, np.nan]])


def test_index_does_not_mutate_and_is_readonly():
    X = np.array([[0.0, 1.0], [2.0, 3.0]])
    before = X.copy()
    idx = NeighborIndex(X)
    X[0, 0] = 99.0
    assert idx.points[0, 0] == 0.0
    assert not idx.points.flags.writeable
    assert np.array_equal(before[1], idx.points[1])


def test_three_point_contents():
    idx = build_index([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]])
    assert idx.n == 3 and idx.dim == 2
    assert radius_neighbors(idx, [0.0, 0.0], 10.0).tolist() == [0, 1, 2]


def _instance(rng, lattice):
    n = int(rng.integers(1, 201))
    D = int(rng.integers(1, 6))
    if lattice:
        X = rng.integers(-3, 4, size=(n, D)).astype(float)
        q = rng.integers(-3, 4, size=D).astype(float)
    else:
        X = rng.standard_normal((n, D))
        q = rng.standard_normal(D)
    return X, q


def test_brute_force_equivalence_500():
    rng = np.random.default_rng(20240501)
    for t in range(500):
        X, q = _instance(rng, lattice=t % 2 == 0)
        idx = NeighborIndex(X)
        Xl = X.tolist()
        k = int(rng.integers(1, len(X) + 1))
        assert idx.kth_neighbor_distance(q, k) == oracles.kth(Xl, q.tolist(), k)
        eps = oracles.kth(Xl, q.tolist(), k) if t % 3 else float(rng.uniform(0, 3))
        assert idx.radius_neighbors(q, eps).tolist() == oracles.radius(Xl, q.tolist(), eps)


def test_large_k_paths_agree_with_oracle():
    rng = np.random.default_rng(3)
    X = rng.integers(0, 20, size=(1500, 2)).astype(float)
    idx = NeighborIndex(X)
    Q = X[:25]
    for k in (1, 5, 1024, 1025, 1500):
        got = idx.kth_distances(Q, k)
        want = [oracles.kth(X.tolist(), q.tolist(), k) for q in Q]
        assert got.tolist() == want


def test_self_kth_matches_oracle_with_duplicates():
    X = np.array([[0.0], [0.0], [5.0], [5.0], [5.0], [7.0]])
    idx = NeighborIndex(X)
    for k in range(1, 7):
        want = [oracles.kth(X.tolist(), x, k) for x in X.tolist()]
        assert idx.self_kth_distances(k).tolist() == want


def test_radius_pairs_cover_all_pairs():
    rng = np.random.default_rng(5)
    X = rng.integers(0, 6, size=(120, 2)).astype(float)
    idx = NeighborIndex(X)
    seen = set()
    for rows, cols, d in idx.radius_pairs(X, 1.5, chunk=17):
        for i, j, dd in zip(rows, cols, d):
            seen.add((int(i), int(j)))
            assert dd == oracles.dist(X[i].tolist(), X[j].tolist())
    want = {(i, j) for i in range(120) for j in oracles.radius(X.tolist(), X[i].tolist(), 1.5)}
    assert seen == want


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=2), min_size=2, max_size=30),
    st.integers(1, 30),
)
def test_kth_monotone_and_radius_bridge(points, k):
    X = np.array(points)
    k = min(k, len(X) - 1)
    idx = NeighborIndex(X)
    q = X[0] + 0.25
    rk, rk1 = idx.kth_neighbor_distance(q, k), idx.kth_neighbor_distance(q, k + 1)
    assert rk <= rk1
    for eps in (rk, rk1, rk * 0.999, 1.0):
        assert (len(idx.radius_neighbors(q, eps)) >= k) == (rk <= eps)


def test_rigid_motion_invariance():
    rng = np.random.default_rng(11)
    X = rng.standard_normal((150, 3))
    q = rng.standard_normal(3)
    R = Rotation.from_rotvec([0.3, -1.1, 0.7]).as_matrix()
    shift = np.array([4.0, -2.0, 0.5])
    a, b = NeighborIndex(X), NeighborIndex(X @ R.T + shift)
    for k in (1, 7, 150):
        assert abs(a.kth_neighbor_distance(q, k) - b.kth_neighbor_distance(R @ q + shift, k)) <= 1e-9


def test_nearest_distances_exact():
    rng = np.random.default_rng(8)
    X = rng.integers(0, 5, size=(60, 2)).astype(float)
    Q = rng.integers(0, 5, size=(40, 2)).astype(float) + 0.5
    got = NeighborIndex(X).nearest_distances(Q)
    want = [oracles.kth(X.tolist(), q.tolist(), 1) for q in Q]
    assert got.tolist() == want

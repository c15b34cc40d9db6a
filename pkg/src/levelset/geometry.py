"""Point clouds and exact Euclidean neighbor queries.

All distances in the package are produced by :func:`euclidean`, which sums
squared coordinate differences strictly left to right before the square
root. The kd-tree only proposes candidates; every distance that reaches a
caller is recomputed with that formula, so results are bit-identical to a
plain linear scan, ties included.
"""

import itertools

import numpy as np
from scipy.spatial import cKDTree

from .exceptions import EmptyCloud, InputError, InvalidRadius, KTooLarge

# Tree distances and canonical distances agree to ~1e-15 relative; anything
# closer than this is treated as a potential tie and re-resolved exactly.
_REL_SLACK = 1e-9
_TINY = 1e-300
# Above this k a heap-based tree query is slower than partitioning full rows.
_BRUTE_K = 1024
_CHUNK_ELEMS = 1 << 22


def check_cloud(X):
    """Validate a point cloud and return it as a C-contiguous float64 array.

    A 1-D input is read as ``n`` points on the line.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise InputError(f"expected a 2-D array of points, got shape {X.shape}")
    if X.shape[0] == 0:
        raise EmptyCloud("point cloud is empty")
    if X.shape[1] == 0:
        raise InputError("points must have at least one coordinate")
    if not np.all(np.isfinite(X)):
        raise InputError("point coordinates must be finite")
    return np.ascontiguousarray(X)


def squared_norm(diff):
    """Sum of squares over the last axis, accumulated left to right."""
    acc = diff[..., 0] * diff[..., 0]
    for j in range(1, diff.shape[-1]):
        acc = acc + diff[..., j] * diff[..., j]
    return acc


def euclidean(points, q):
    """Canonical distances from each row of ``points`` to ``q`` (broadcasting)."""
    return np.sqrt(squared_norm(np.asarray(points) - np.asarray(q)))


def _check_eps(eps):
    eps = float(eps)
    if not np.isfinite(eps) or eps < 0:
        raise InvalidRadius(f"radius must be a finite nonnegative number, got {eps}")
    return eps


class NeighborIndex:
    """Immutable exact k-NN and radius index over a point cloud.

    Queries are read-only and safe to issue from several threads.
    """

    def __init__(self, points):
        pts = check_cloud(points).copy()
        pts.setflags(write=False)
        self.points = pts
        self._tree = cKDTree(pts)
        self._self_kth = {}

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return self.n

    def _queries(self, Q):
        Q = np.asarray(Q, dtype=np.float64)
        if Q.ndim == 1:
            Q = Q.reshape(-1, 1) if self.dim == 1 else Q.reshape(1, -1)
        if Q.ndim != 2 or Q.shape[1] != self.dim:
            raise InputError(f"queries must have {self.dim} coordinates")
        if not np.all(np.isfinite(Q)):
            raise InputError("query coordinates must be finite")
        return np.ascontiguousarray(Q)

    def _check_k(self, k):
        if int(k) != k or k < 1:
            raise InputError(f"k must be a positive integer, got {k}")
        k = int(k)
        if k > self.n:
            raise KTooLarge(f"k={k} exceeds the number of points n={self.n}")
        return k

    # -- k-th neighbor distances ---------------------------------------------

    def kth_distances(self, Q, k):
        """r_k for each query row: the k-th smallest distance to the cloud."""
        Q = self._queries(Q)
        k = self._check_k(k)
        if k > _BRUTE_K or k == self.n:
            return self._kth_brute(Q, k)
        return self._kth_tree(Q, k)

    def kth_neighbor_distance(self, q, k):
        return float(self.kth_distances(np.reshape(q, (1, -1)), k)[0])

    def self_kth_distances(self, k):
        """r_k at every sample point, self included; cached per k."""
        k = self._check_k(k)
        out = self._self_kth.get(k)
        if out is None:
            out = self.kth_distances(self.points, k)
            out.setflags(write=False)
            self._self_kth[k] = out
        return out

    def _kth_brute(self, Q, k):
        out = np.empty(Q.shape[0])
        step = max(1, _CHUNK_ELEMS // (self.n * self.dim))
        for s in range(0, Q.shape[0], step):
            sq = squared_norm(self.points[None, :, :] - Q[s:s + step, None, :])
            out[s:s + step] = np.sqrt(np.partition(sq, k - 1, axis=1)[:, k - 1])
        return out

    def _kth_tree(self, Q, k):
        out = np.empty(Q.shape[0])
        kq = k + 1
        step = max(1, _CHUNK_ELEMS // (kq * self.dim))
        for s in range(0, Q.shape[0], step):
            Qc = Q[s:s + step]
            tdist, idx = self._tree.query(Qc, k=kq)
            canon = np.sqrt(squared_norm(self.points[idx] - Qc[:, None, :]))
            out[s:s + step] = np.partition(canon, k - 1, axis=1)[:, k - 1]
            near_tie = ~(tdist[:, k] > tdist[:, k - 1] * (1 + _REL_SLACK))
            for row in np.flatnonzero(near_tie):
                r = tdist[row, k - 1] * (1 + _REL_SLACK) + _TINY
                cand = np.asarray(self._tree.query_ball_point(Qc[row], r), dtype=np.intp)
                d = euclidean(self.points[cand], Qc[row])
                out[s + row] = np.partition(d, k - 1)[k - 1]
        return out

    # -- nearest distance ----------------------------------------------------

    def nearest_distances(self, Q):
        """Distance from each query to its closest cloud point."""
        Q = self._queries(Q)
        if self.n == 1:
            return euclidean(Q, self.points[0])
        out = np.empty(Q.shape[0])
        step = max(1, _CHUNK_ELEMS // (2 * self.dim))
        for s in range(0, Q.shape[0], step):
            Qc = Q[s:s + step]
            tdist, idx = self._tree.query(Qc, k=2)
            out[s:s + step] = euclidean(self.points[idx[:, 0]], Qc)
            near_tie = ~(tdist[:, 1] > tdist[:, 0] * (1 + _REL_SLACK))
            for row in np.flatnonzero(near_tie):
                r = tdist[row, 0] * (1 + _REL_SLACK) + _TINY
                cand = np.asarray(self._tree.query_ball_point(Qc[row], r), dtype=np.intp)
                out[s + row] = euclidean(self.points[cand], Qc[row]).min()
        return out

    # -- radius queries ------------------------------------------------------

    def radius_neighbors(self, q, eps):
        """Ids of points with distance <= eps from ``q``, ascending."""
        eps = _check_eps(eps)
        q = self._queries(np.reshape(q, (1, -1)))[0]
        cand = np.asarray(
            self._tree.query_ball_point(q, eps * (1 + _REL_SLACK) + _TINY), dtype=np.intp
        )
        keep = cand[euclidean(self.points[cand], q) <= eps]
        return np.sort(keep)

    def radius_pairs(self, Q, eps, chunk=4096):
        """Yield ``(rows, cols, dists)`` for all query/point pairs within eps.

        Rows index into ``Q``; within each row, columns ascend. Results come
        in chunks of query rows so the full edge list is never held at once.
        """
        eps = _check_eps(eps)
        Q = self._queries(Q)
        r = eps * (1 + _REL_SLACK) + _TINY
        for s in range(0, Q.shape[0], chunk):
            Qc = Q[s:s + chunk]
            lists = self._tree.query_ball_point(Qc, r, return_sorted=True)
            lengths = np.fromiter((len(c) for c in lists), dtype=np.intp, count=len(lists))
            cols = np.fromiter(
                itertools.chain.from_iterable(lists), dtype=np.intp, count=int(lengths.sum())
            )
            rows = np.repeat(np.arange(len(Qc)), lengths)
            d = euclidean(self.points[cols], Qc[rows])
            keep = d <= eps
            yield rows[keep] + s, cols[keep], d[keep]


def build_index(cloud):
    """Build a :class:`NeighborIndex`; the input array is copied, never mutated."""
    return NeighborIndex(cloud)


def kth_neighbor_distance(index, q, k):
    return index.kth_neighbor_distance(q, k)


def radius_neighbors(index, q, eps):
    return index.radius_neighbors(q, eps)

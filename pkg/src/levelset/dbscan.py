"""DBSCAN as connected components of an epsilon-neighborhood level graph.

The level graph G(k, eps) has the samples with r_k <= eps as vertices and
joins two of them when they are at most eps apart. Its components are
exactly the core-point sets of DBSCAN(min_pts=k, eps); every cluster is one
component plus the border points within eps of it.
"""

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _csgraph_components

from .exceptions import InvalidRadius
from .geometry import NeighborIndex

NOISE = -1


@dataclass(frozen=True)
class LevelGraph:
    vertices: np.ndarray
    k: int
    eps: float

    def __len__(self):
        return len(self.vertices)


@dataclass(frozen=True, eq=False)
class Clustering:
    """Per-point labels (``NOISE`` = -1) and core flags of one DBSCAN run."""

    labels: np.ndarray
    core_flags: np.ndarray
    min_pts: int
    eps: float

    @property
    def n_clusters(self):
        return int(self.labels.max()) + 1 if self.labels.size and self.labels.max() >= 0 else 0

    @property
    def core_indices(self):
        return np.flatnonzero(self.core_flags)

    def members(self, cluster_id):
        return np.flatnonzero(self.labels == cluster_id)

    def clusters(self):
        return [self.members(c) for c in range(self.n_clusters)]

    def same_as(self, other):
        return (
            np.array_equal(self.labels, other.labels)
            and np.array_equal(self.core_flags, other.core_flags)
        )


def _check_positive_eps(eps):
    eps = float(eps)
    if not np.isfinite(eps) or eps <= 0:
        raise InvalidRadius(f"eps must be a positive finite number, got {eps}")
    return eps


def order_labels(labels):
    """Renumber non-noise labels 0..m-1 by the smallest point id carrying each."""
    labels = np.asarray(labels)
    out = np.full(labels.shape, NOISE, dtype=np.intp)
    mask = labels != NOISE
    if not mask.any():
        return out
    uniq, first = np.unique(labels[mask], return_index=True)
    ids = np.flatnonzero(mask)
    rank = np.empty(len(uniq), dtype=np.intp)
    rank[np.argsort(ids[first], kind="stable")] = np.arange(len(uniq))
    out[mask] = rank[np.searchsorted(uniq, labels[mask])]
    return out


def _merge(comp, a, b):
    """Union the partition ``comp`` with extra edges (a, b) over its labels."""
    a, b = comp[a], comp[b]
    keep = a != b
    if not keep.any():
        return comp
    m = len(comp)
    g = coo_matrix((np.ones(int(keep.sum()), dtype=np.int8), (a[keep], b[keep])), shape=(m, m))
    _, cc = _csgraph_components(g, directed=False)
    return cc[comp]


def _components_of(points, eps):
    index = NeighborIndex(points)
    comp = np.arange(index.n)
    for rows, cols, _ in index.radius_pairs(points, eps):
        upper = rows < cols
        comp = _merge(comp, rows[upper], cols[upper])
    return order_labels(comp)


def build_level_graph(index, k, eps):
    eps = _check_positive_eps(eps)
    rk = index.self_kth_distances(k)
    return LevelGraph(vertices=np.flatnonzero(rk <= eps), k=int(k), eps=eps)


def connected_components(graph, index):
    """Component label of each vertex of ``graph``, aligned with ``graph.vertices``."""
    if len(graph.vertices) == 0:
        return np.empty(0, dtype=np.intp)
    return _components_of(index.points[graph.vertices], graph.eps)


def _nearest_core(index, core_ids, queries, eps):
    """For each query id: position in ``core_ids`` of the nearest core within eps.

    Distance ties go to the smaller core id; -1 where no core is within eps.
    """
    best = np.full(len(queries), -1, dtype=np.intp)
    if len(core_ids) == 0 or len(queries) == 0:
        return best
    core_index = NeighborIndex(index.points[core_ids])
    for rows, cols, d in core_index.radius_pairs(index.points[queries], eps):
        if rows.size == 0:
            continue
        order = np.lexsort((cols, d, rows))
        rows_s = rows[order]
        _, first = np.unique(rows_s, return_index=True)
        best[rows_s[first]] = cols[order][first]
    return best


def assign_border(index, labels, core_flags, eps):
    """Give each non-core point the label of its nearest core point within eps."""
    labels = labels.copy()
    core_ids = np.flatnonzero(core_flags)
    others = np.flatnonzero(~core_flags)
    nearest = _nearest_core(index, core_ids, others, eps)
    hit = nearest >= 0
    labels[others[hit]] = labels[core_ids[nearest[hit]]]
    labels[others[~hit]] = NOISE
    return labels


def dbscan_cluster(index, min_pts, eps):
    graph = build_level_graph(index, min_pts, eps)
    core = np.zeros(index.n, dtype=bool)
    core[graph.vertices] = True
    labels = np.full(index.n, NOISE, dtype=np.intp)
    if len(graph.vertices):
        labels[graph.vertices] = connected_components(graph, index)
        labels = order_labels(assign_border(index, labels, core, graph.eps))
    return Clustering(labels=labels, core_flags=core, min_pts=int(min_pts), eps=graph.eps)

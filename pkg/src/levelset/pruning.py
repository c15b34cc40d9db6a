"""False-cluster removal by a second DBSCAN pass at a wider radius."""

from dataclasses import dataclass

import numpy as np

from .dbscan import NOISE, Clustering, dbscan_cluster, order_labels
from .exceptions import EpsOrderViolation, InternalInvariant


@dataclass(frozen=True, eq=False)
class PrunedClustering:
    clustering: Clustering
    merge_map: dict
    eps: float
    eps_tilde: float
    coarse: Clustering = None

    @property
    def labels(self):
        return self.clustering.labels

    @property
    def n_clusters(self):
        return self.clustering.n_clusters


def merge_clusters(fine, coarse):
    """Union clusters of ``fine`` whose core points fall in the same ``coarse`` cluster.

    Returns the merged clustering and the map fine id -> merged id. Points
    keep their fine-run assignment (border choice included), so noise is
    unchanged and each merged cluster is a union of whole fine clusters.
    """
    if fine.n_clusters == 0:
        return Clustering(fine.labels.copy(), fine.core_flags.copy(), fine.min_pts, fine.eps), {}
    groups = {}
    for c in range(fine.n_clusters):
        cores = np.flatnonzero((fine.labels == c) & fine.core_flags)
        targets = np.unique(coarse.labels[cores])
        if len(targets) != 1 or targets[0] == NOISE:
            raise InternalInvariant(
                f"cluster {c}: core points map to coarse clusters {targets.tolist()}"
            )
        groups[c] = int(targets[0])
    # relabel fine ids by coarse target, then renumber by smallest member
    lookup = np.array([groups[c] for c in range(fine.n_clusters)], dtype=np.intp)
    raw = np.where(fine.labels == NOISE, NOISE, lookup[np.maximum(fine.labels, 0)])
    merged = order_labels(raw)
    merge_map = {}
    for c in range(fine.n_clusters):
        first = np.flatnonzero(fine.labels == c)[0]
        merge_map[c] = int(merged[first])
    clustering = Clustering(merged, fine.core_flags.copy(), fine.min_pts, fine.eps)
    return clustering, merge_map


def prune_false_clusters(index, k, eps, eps_tilde):
    if eps_tilde < eps:
        raise EpsOrderViolation(f"eps_tilde={eps_tilde} must be >= eps={eps}")
    fine = dbscan_cluster(index, k, eps)
    coarse = dbscan_cluster(index, k, eps_tilde)
    merged, merge_map = merge_clusters(fine, coarse)
    return PrunedClustering(merged, merge_map, float(eps), float(eps_tilde), coarse)

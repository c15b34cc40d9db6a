"""Hausdorff-metric recovery evaluation."""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .dbscan import NOISE, Clustering
from .exceptions import EmptySet, EmptyTarget, InvalidArgument
from .geometry import NeighborIndex


def _as_points(A, dim=None):
    A = np.asarray(A, dtype=np.float64)
    if A.size == 0:
        return A.reshape(0, dim or (A.shape[-1] if A.ndim == 2 else 1))
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    return A


def _directed(A, index_b):
    if len(A) == 0:
        return 0.0
    return float(index_b.nearest_distances(A).max())


def directed_hausdorff(A, B):
    """max over a in A of the distance from a to B (0 for empty A)."""
    A, B = _as_points(A), _as_points(B)
    if len(A) == 0:
        return 0.0
    if len(B) == 0:
        raise EmptyTarget("target set is empty")
    return _directed(A, NeighborIndex(B))


def hausdorff(A, B):
    A, B = _as_points(A), _as_points(B)
    if len(A) == 0 or len(B) == 0:
        raise EmptySet("Hausdorff distance needs two nonempty sets")
    return max(_directed(A, NeighborIndex(B)), _directed(B, NeighborIndex(A)))


def optimal_assignment(cost):
    """Minimum-cost matching of size min(rows, cols).

    Among optimal matchings, the one whose truth ids, read in estimate-id
    order, are lexicographically smallest is returned (unmatched last).
    """
    cost = np.asarray(cost, dtype=np.float64)
    m, t = cost.shape
    size = min(m, t)
    if size == 0:
        return []

    def best_total(rows, cols):
        if not rows or not cols:
            return 0.0
        sub = cost[np.ix_(rows, cols)]
        r, c = linear_sum_assignment(sub)
        return float(sub[r, c].sum())

    target = best_total(list(range(m)), list(range(t)))
    tol = 1e-9 * (1 + abs(target))
    pairs, spent = [], 0.0
    cols_left = list(range(t))
    for i in range(m):
        rows_after = list(range(i + 1, m))
        need_after_match = size - len(pairs) - 1
        chosen = False
        for j in cols_left:
            rest = [c for c in cols_left if c != j]
            if min(len(rows_after), len(rest)) != need_after_match:
                continue
            if spent + cost[i, j] + best_total(rows_after, rest) <= target + tol:
                pairs.append((i, j))
                spent += cost[i, j]
                cols_left = rest
                chosen = True
                break
        if not chosen and min(len(rows_after), len(cols_left)) != size - len(pairs):
            raise AssertionError("assignment search lost feasibility")
    return pairs


@dataclass(frozen=True)
class Match:
    estimate: int
    truth: int
    error: float
    resolved: Optional[bool] = None


@dataclass
class RecoveryReport:
    matches: list
    unmatched_estimates: list
    unmatched_truth: list
    bijection: bool
    theoretical_bound: Optional[float] = None
    rate_exponent: float = float("nan")
    resolution: Optional[float] = None
    extra: dict = field(default_factory=dict)

    @property
    def errors(self):
        return [m.error for m in self.matches]

    @property
    def max_error(self):
        return max(self.errors) if self.matches else float("nan")

    def to_dict(self):
        return {
            "matches": [
                {"estimate": m.estimate, "truth": m.truth, "hausdorff": m.error, "resolved": m.resolved}
                for m in self.matches
            ],
            "unmatched_estimates": list(self.unmatched_estimates),
            "unmatched_truth": list(self.unmatched_truth),
            "bijection": self.bijection,
            "theoretical_bound": self.theoretical_bound,
            "rate_exponent": self.rate_exponent,
            "resolution": self.resolution,
            **self.extra,
        }


def match_clusters(estimated, points, truth, resolution=None, theoretical_bound=None,
                   rate_exponent=float("nan")):
    """Match estimated clusters to truth components by total Hausdorff cost.

    ``estimated`` is a :class:`Clustering` or a label array (``NOISE`` = -1)
    over ``points``; ``truth`` is a sequence of dense point sets.
    """
    labels = estimated.labels if isinstance(estimated, Clustering) else np.asarray(estimated)
    points = _as_points(points)
    if len(labels) != len(points):
        raise InvalidArgument(f"{len(labels)} labels for {len(points)} points")
    est_ids = sorted(int(c) for c in np.unique(labels) if c != NOISE)
    truth = [_as_points(T, points.shape[1]) for T in truth]
    if any(len(T) == 0 for T in truth):
        raise EmptySet("truth components must be nonempty")

    est_sets = [points[labels == c] for c in est_ids]
    est_idx = [NeighborIndex(S) for S in est_sets]
    truth_idx = [NeighborIndex(T) for T in truth]
    cost = np.empty((len(est_ids), len(truth)))
    for a, S in enumerate(est_sets):
        for b, T in enumerate(truth):
            cost[a, b] = max(_directed(S, truth_idx[b]), _directed(T, est_idx[a]))

    pairs = optimal_assignment(cost)
    matches = []
    for a, b in pairs:
        err = float(cost[a, b])
        resolved = None if resolution is None else bool(resolution <= err / 10)
        matches.append(Match(est_ids[a], b, err, resolved))
    used_est = {a for a, _ in pairs}
    used_truth = {b for _, b in pairs}
    unmatched_est = [est_ids[a] for a in range(len(est_ids)) if a not in used_est]
    unmatched_truth = [b for b in range(len(truth)) if b not in used_truth]
    return RecoveryReport(
        matches=matches,
        unmatched_estimates=unmatched_est,
        unmatched_truth=unmatched_truth,
        bijection=not unmatched_est and not unmatched_truth,
        theoretical_bound=theoretical_bound,
        rate_exponent=rate_exponent,
        resolution=resolution,
    )


def _check_positive(**kwargs):
    for name, v in kwargs.items():
        if not (isinstance(v, (int, float, np.floating, np.integer)) and v > 0 and math.isfinite(v)):
            raise InvalidArgument(f"{name} must be positive and finite, got {v}")


def theoretical_error_bound(level, c_beta_lower, beta, c_dn, k):
    """2 (4 lambda / C_beta)^(1/beta) C_{delta,n}^(2/beta) k^(-1/(2 beta))."""
    _check_positive(level=level, c_beta_lower=c_beta_lower, beta=beta, c_dn=c_dn, k=k)
    return (
        2 * (4 * level / c_beta_lower) ** (1 / beta) * c_dn ** (2 / beta) * k ** (-1 / (2 * beta))
    )


def rate_exponent(dim, beta, full_dimensional=False):
    """Exponent of n in the Hausdorff rate: -1/(2 beta + dim max(1, beta)), or -1/(2 beta + D)."""
    _check_positive(dim=dim, beta=beta)
    if full_dimensional:
        return -1 / (2 * beta + dim)
    return -1 / (2 * beta + dim * max(1.0, beta))

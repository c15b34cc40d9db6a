"""k-NN density estimation."""

import math

import numpy as np

from .exceptions import InvalidDimension


def unit_ball_volume(d):
    """Volume of the unit ball in R^d, pi^(d/2) / Gamma(d/2 + 1), for real d > 0."""
    d = float(d)
    if not d > 0 or not math.isfinite(d):
        raise InvalidDimension(f"dimension must be positive, got {d}")
    if d.is_integer() and d <= 200:
        # v_d = 2 pi / d * v_{d-2}, exact at d = 1 and 2
        v = 2.0 if d % 2 else math.pi
        for j in range(3 if d % 2 else 4, int(d) + 1, 2):
            v *= 2 * math.pi / j
        return v
    if d / 2 + 1 < 170:
        return math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    return math.exp(d / 2 * math.log(math.pi) - math.lgamma(d / 2 + 1))


def density_from_radius(r, k, n, d):
    """k / (n * v_d * r^d), with +inf where r == 0. Works on arrays."""
    v = unit_ball_volume(d)
    r = np.asarray(r, dtype=np.float64)
    with np.errstate(divide="ignore"):
        out = k / (n * v * r ** float(d))
    return out


def knn_density(index, q, k, d):
    r = index.kth_neighbor_distance(q, k)
    return float(density_from_radius(r, k, index.n, d))


def knn_density_all(index, k, d):
    """f_k at every sample point, in point-id order."""
    return density_from_radius(index.self_kth_distances(k), k, index.n, d)


def level_from_radius(eps, k, n, d):
    """Density level k / (n v_d eps^d) matching a radius threshold eps."""
    return float(density_from_radius(eps, k, n, d))

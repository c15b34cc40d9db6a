"""Parameter formulas and data-driven estimates of d, beta and k.

``log`` is the natural logarithm throughout; the unspecified constants
(c0, k_l, k_u) absorb any change of base.
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .density import knn_density_all, unit_ball_volume
from .exceptions import (
    DegenerateBeta,
    DegenerateSample,
    EmptyRange,
    InfeasibleK,
    InvalidArgument,
    InvalidDelta,
    InvalidDimension,
    InvalidN,
    InvalidRadius,
    KTooLarge,
    RadiusOutOfRange,
)
from .geometry import NeighborIndex

DEFAULT_C0 = 0.05
DEFAULT_DELTA = 0.1
DEFAULT_EPS0 = 0.1


def _positive(name, value):
    value = float(value)
    if not (value > 0 and math.isfinite(value)):
        raise InvalidArgument(f"{name} must be positive and finite, got {value}")
    return value


def _check_delta(delta):
    delta = float(delta)
    if not 0 < delta < 1:
        raise InvalidDelta(f"delta must lie in (0, 1), got {delta}")
    return delta


def _check_dim(d):
    d = float(d)
    if not (d > 0 and math.isfinite(d)):
        raise InvalidDimension(f"dimension must be positive, got {d}")
    return d


def _check_n(n, minimum):
    if int(n) != n or n < minimum:
        raise InvalidN(f"n must be an integer >= {minimum}, got {n}")
    return int(n)


def round_half_up(x):
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class TuningConfig:
    """Inputs to the parameter formulas.

    ``level`` is the target density level lambda. ``slack_override``, when
    set, replaces C_{delta,n}^2 / sqrt(k) in the radius formula.
    """

    level: float
    k: int
    d: float
    delta: float = DEFAULT_DELTA
    c0: float = DEFAULT_C0
    slack_override: Optional[float] = None
    eps0: float = DEFAULT_EPS0
    k_l: float = 1.0
    k_u: float = 1.0

    def __post_init__(self):
        _positive("level", self.level)
        _check_delta(self.delta)
        _positive("c0", self.c0)
        _check_dim(self.d)
        _positive("eps0", self.eps0)
        _positive("k_l", self.k_l)
        _positive("k_u", self.k_u)
        if int(self.k) != self.k or self.k < 1:
            raise InvalidArgument(f"k must be a positive integer, got {self.k}")
        if self.slack_override is not None and not float(self.slack_override) >= 0:
            raise InvalidArgument(f"slack must be nonnegative, got {self.slack_override}")


def c_delta_n(c0, delta, n, d):
    """C0 * log(2/delta) * sqrt(d log n)."""
    c0 = _positive("c0", c0)
    delta = _check_delta(delta)
    n = _check_n(n, 2)
    d = _check_dim(d)
    return c0 * math.log(2 / delta) * math.sqrt(d * math.log(n))


def slack(cfg, n):
    """Relative slack s below lambda used by the radius formula."""
    if cfg.slack_override is not None:
        return float(cfg.slack_override)
    return c_delta_n(cfg.c0, cfg.delta, n, cfg.d) ** 2 / math.sqrt(cfg.k)


def slack_tilde(cfg, n):
    """The wider slack for the second (pruning) radius: cube root of k instead of square root."""
    if cfg.slack_override is not None:
        # the override fixes C^2 = s * sqrt(k)
        return float(cfg.slack_override) * cfg.k ** (1 / 6)
    return c_delta_n(cfg.c0, cfg.delta, n, cfg.d) ** 2 / cfg.k ** (1 / 3)


def _radius_at(k, n, d, level, s, what):
    if s >= 1:
        raise InfeasibleK(
            f"{what}: slack {s:.6g} >= 1 leaves no positive level; "
            "increase k, decrease c0, or set slack_override"
        )
    return (k / (n * unit_ball_volume(d) * level * (1 - s))) ** (1 / d)


def epsilon_for_level(cfg, n):
    """(k / (n v_d lambda (1 - s)))^(1/d)."""
    n = _check_n(n, 2)
    return _radius_at(cfg.k, n, cfg.d, cfg.level, slack(cfg, n), "eps")


def epsilon_tilde(cfg, n):
    n = _check_n(n, 2)
    return _radius_at(cfg.k, n, cfg.d, cfg.level, slack_tilde(cfg, n), "eps_tilde")


def k_range(n, d, beta_prime, k_l=1.0, k_u=1.0):
    """Admissible (k_lo, k_hi), clamped to [1, n]."""
    n = _check_n(n, 3)
    d = _check_dim(d)
    if not 0 < beta_prime <= 1:
        raise InvalidArgument(f"beta_prime must lie in (0, 1], got {beta_prime}")
    _positive("k_l", k_l)
    _positive("k_u", k_u)
    ln = math.log(n)
    lo = math.ceil(k_l * ln**2)
    hi = math.floor(k_u * ln ** (2 * d / (2 + d)) * n ** (2 * beta_prime / (2 * beta_prime + d)))
    lo, hi = min(max(lo, 1), n), min(max(hi, 1), n)
    if lo > hi:
        raise EmptyRange(f"no admissible k for n={n}: lower bound {lo} > upper bound {hi}")
    return lo, hi


# -- intrinsic dimension -----------------------------------------------------


@dataclass(frozen=True)
class DimensionEstimate:
    d_hat_real: float
    d_hat_rounded: int
    n_used: int
    provisional: float = float("nan")
    density_threshold: float = float("nan")
    per_point: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self):
        return {
            "d_hat_real": self.d_hat_real,
            "d_hat_rounded": self.d_hat_rounded,
            "n_used": self.n_used,
            "provisional": self.provisional,
            "density_threshold": self.density_threshold,
        }


def _check_2k(index, k):
    if int(k) != k or k < 1:
        raise InvalidArgument(f"k must be a positive integer, got {k}")
    if 2 * k > index.n:
        raise KTooLarge(f"dimension estimate needs 2k <= n (k={k}, n={index.n})")
    return int(k)


def pointwise_dimension(index, k):
    """log 2 / log(r_2k / r_k) at every sample; NaN where undefined."""
    k = _check_2k(index, k)
    rk = index.self_kth_distances(k)
    r2k = index.self_kth_distances(2 * k)
    out = np.full(index.n, np.nan)
    ok = (rk > 0) & (r2k > rk)
    out[ok] = math.log(2) / np.log(r2k[ok] / rk[ok])
    return out


def estimate_dimension_at(index, i, k):
    """Pointwise dimension at sample ``i``, or None when the ratio is degenerate."""
    k = _check_2k(index, k)
    rk = index.self_kth_distances(k)[i]
    r2k = index.self_kth_distances(2 * k)[i]
    if rk == 0 or r2k == rk:
        return None
    return math.log(2) / math.log(r2k / rk)


def _round_dim(x):
    return max(1, round_half_up(x))


def estimate_dimension(index, k, density_quantile=0.5, keep_per_point=False):
    """Median pointwise dimension over the denser samples.

    Two passes: the median over all samples gives a provisional dimension,
    which fixes the exponent of f_k; samples with f_k at or above the
    ``density_quantile`` quantile are kept and their median is returned.
    """
    if not 0 < density_quantile <= 1:
        raise InvalidArgument(f"density_quantile must lie in (0, 1], got {density_quantile}")
    d_point = pointwise_dimension(index, k)
    defined = ~np.isnan(d_point)
    if not defined.any():
        raise DegenerateSample("no sample has a defined pointwise dimension (all r_k ratios degenerate)")
    provisional = float(np.median(d_point[defined]))
    f = knn_density_all(index, k, _round_dim(provisional))
    threshold = float(np.quantile(f, density_quantile, method="lower"))
    used = defined & (f >= threshold)
    if not used.any():
        raise DegenerateSample("no dense sample has a defined pointwise dimension")
    d_real = float(np.median(d_point[used]))
    return DimensionEstimate(
        d_hat_real=d_real,
        d_hat_rounded=_round_dim(d_real),
        n_used=int(used.sum()),
        provisional=provisional,
        density_threshold=threshold,
        per_point=d_point if keep_per_point else None,
    )


# -- boundary regularity -----------------------------------------------------


def min_ball_max(index, values, r):
    """min over samples x0 of max{values[x] : |x - x0| <= r}.

    Binary search over the distinct values: the answer is <= v exactly when
    some sample has no point with value > v inside its closed r-ball.
    """
    values = np.asarray(values, dtype=np.float64)
    levels = np.unique(values)

    def achievable(v):
        blocking = values > v
        if not blocking.any():
            return True
        nearest = NeighborIndex(index.points[blocking]).nearest_distances(index.points[~blocking])
        return bool((nearest > r).any())

    lo, hi = 0, len(levels) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if achievable(levels[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(levels[lo])


def compute_D_hat(index, k, r, level, d):
    """min_{x0} max_{x in B(x0, r)} |lambda - f_k(x)| over the sample."""
    r = float(r)
    if not (r > 0 and math.isfinite(r)):
        raise InvalidRadius(f"r must be positive, got {r}")
    level = _positive("level", level)
    f = knn_density_all(index, k, d)
    return min_ball_max(index, np.abs(level - f), r)


@dataclass(frozen=True)
class BetaEstimate:
    beta_hat: float
    d_hat_level: float
    r: float
    k_beta: int
    k_beta_source: str = "default"
    r_source: str = "default"

    def to_dict(self):
        return {
            "beta_hat": self.beta_hat,
            "d_hat_level": self.d_hat_level,
            "r": self.r,
            "k_beta": self.k_beta,
            "k_beta_source": self.k_beta_source,
            "r_source": self.r_source,
        }


def beta_schedule(n, k_scale=1.0, r_scale=1.0):
    """(k_beta, r) = (min(floor(k_scale (log n)^5), n // 2), r_scale / sqrt(log n)).

    With unit scales this is the asymptotic default; the cap at n // 2 binds
    for n up to about 1e5.
    """
    n = _check_n(n, 3)
    ln = math.log(n)
    k = max(1, min(math.floor(k_scale * ln**5), n // 2))
    return k, r_scale / math.sqrt(ln)


def beta_from_D_hat(d_hat_level, r):
    """log base r of the level-deviation statistic."""
    if not 0 < r < 1:
        raise RadiusOutOfRange(f"r must lie in (0, 1), got {r}")
    if d_hat_level == 0 or math.isinf(d_hat_level):
        raise DegenerateBeta(
            f"D_hat = {d_hat_level} gives no finite beta estimate", d_hat_level=d_hat_level
        )
    beta = math.log(d_hat_level) / math.log(r)
    if beta <= 0:
        warnings.warn(f"beta estimate {beta:.4g} <= 0; choose_k will clamp it", RuntimeWarning)
    return beta


def estimate_beta(index, level, d, k_beta=None, r=None):
    n = index.n
    default_k, default_r = beta_schedule(n)
    if k_beta is None:
        k_source = "default-capped" if default_k == n // 2 else "default"
        k_beta = default_k
    else:
        k_source = "override"
    r_source = "default" if r is None else "override"
    r = default_r if r is None else float(r)
    if not 0 < r < 1:
        raise RadiusOutOfRange(f"r must lie in (0, 1), got {r}")
    D = compute_D_hat(index, k_beta, r, level, d)
    beta = beta_from_D_hat(D, r)
    return BetaEstimate(beta, D, r, int(k_beta), k_source, r_source)


# -- adaptive k --------------------------------------------------------------


def beta_prime(beta_hat, eps0=DEFAULT_EPS0):
    """min{1, beta_hat - eps0}, floored at 0.1."""
    if math.isnan(beta_hat):
        return 0.1
    return min(1.0, max(beta_hat - eps0, 0.1))


def k_exponent(beta_p, d, remark_exponent=False):
    num = beta_p if remark_exponent else 2 * beta_p
    return num / (2 * beta_p + d)


def choose_k(n, d, beta_hat, eps0=DEFAULT_EPS0, k_l=1.0, remark_exponent=False):
    """round(n^(2b'/(2b'+d))) clamped to [ceil(k_l (log n)^2), n // 2].

    ``remark_exponent`` switches to the exponent b'/(2b'+d).
    """
    n = _check_n(n, 3)
    d = _check_dim(d)
    bp = beta_prime(beta_hat, eps0)
    k = round_half_up(n ** k_exponent(bp, d, remark_exponent))
    lo = math.ceil(k_l * math.log(n) ** 2)
    return int(max(1, min(max(k, lo), n // 2)))

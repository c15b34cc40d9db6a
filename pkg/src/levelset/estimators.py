"""scikit-learn style estimators over the functional API."""

import math

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from . import tuning
from .dbscan import dbscan_cluster
from .density import density_from_radius, knn_density_all
from .exceptions import DegenerateBeta, InvalidArgument
from .geometry import NeighborIndex, check_cloud
from .pruning import prune_false_clusters


def _index_of(X):
    return X if isinstance(X, NeighborIndex) else NeighborIndex(check_cloud(X))


class DBSCAN(BaseEstimator, ClusterMixin):
    """DBSCAN with closed eps-balls; ``min_pts`` counts the point itself."""

    def __init__(self, eps=0.5, min_pts=5):
        self.eps = eps
        self.min_pts = min_pts

    def fit(self, X, y=None):
        index = _index_of(X)
        result = dbscan_cluster(index, self.min_pts, self.eps)
        self.clustering_ = result
        self.labels_ = result.labels
        self.core_sample_indices_ = result.core_indices
        self.n_clusters_ = result.n_clusters
        return self


class KNNDensity(BaseEstimator):
    """k-NN density f_k = k / (n v_d r_k^d) with the fit sample as reference."""

    def __init__(self, k=10, dim=None):
        self.k = k
        self.dim = dim

    def fit(self, X, y=None):
        self.index_ = _index_of(X)
        self.dim_ = self.index_.dim if self.dim is None else self.dim
        return self

    def score_samples(self, X):
        check_is_fitted(self, "index_")
        r = self.index_.kth_distances(check_cloud(X), self.k)
        return density_from_radius(r, self.k, self.index_.n, self.dim_)

    def fit_transform(self, X, y=None):
        """Density at every fit sample (the sample counts itself)."""
        self.fit(X)
        return knn_density_all(self.index_, self.k, self.dim_)


class IntrinsicDimension(BaseEstimator):
    def __init__(self, k=100, density_quantile=0.5):
        self.k = k
        self.density_quantile = density_quantile

    def fit(self, X, y=None):
        est = tuning.estimate_dimension(_index_of(X), self.k, self.density_quantile)
        self.estimate_ = est
        self.dim_ = est.d_hat_rounded
        self.dim_real_ = est.d_hat_real
        return self


class LevelSetDBSCAN(BaseEstimator, ClusterMixin):
    """Estimate the clusters of {f >= level} with auto-tuned DBSCAN.

    ``k`` and ``dim`` accept ``"auto"``. The automatic pipeline estimates
    the intrinsic dimension, then the boundary exponent beta, then picks k,
    and finally sets eps from the level formula. With ``prune`` a second run
    at the wider radius merges fragments of the same component.

    In ``"full_dimensional"`` mode the dimension is the ambient one.
    """

    def __init__(
        self,
        level=1.0,
        delta=tuning.DEFAULT_DELTA,
        c0=tuning.DEFAULT_C0,
        k="auto",
        dim="auto",
        slack=None,
        prune=False,
        mode="manifold",
        eps0=tuning.DEFAULT_EPS0,
        k_l=1.0,
        k_u=1.0,
        k_beta=None,
        beta_radius=None,
        beta=None,
        dim_k=None,
        density_quantile=0.5,
        remark_exponent=False,
    ):
        self.level = level
        self.delta = delta
        self.c0 = c0
        self.k = k
        self.dim = dim
        self.slack = slack
        self.prune = prune
        self.mode = mode
        self.eps0 = eps0
        self.k_l = k_l
        self.k_u = k_u
        self.k_beta = k_beta
        self.beta_radius = beta_radius
        self.beta = beta
        self.dim_k = dim_k
        self.density_quantile = density_quantile
        self.remark_exponent = remark_exponent

    def _resolve_dim(self, index):
        if self.dim != "auto":
            return float(self.dim), "explicit", None
        if self.mode == "full_dimensional":
            return float(index.dim), "ambient", None
        n = index.n
        k_dim = self.dim_k or max(1, min(100, n // 4))
        est = tuning.estimate_dimension(index, k_dim, self.density_quantile)
        return float(est.d_hat_rounded), "auto", est

    def _resolve_beta(self, index, d):
        if self.beta is not None:
            return float(self.beta), "explicit", None
        try:
            est = tuning.estimate_beta(index, self.level, d, self.k_beta, self.beta_radius)
            return est.beta_hat, "auto", est
        except DegenerateBeta as exc:
            # D_hat = 0 means a sharp boundary; D_hat = inf an empty band
            beta = math.inf if exc.d_hat_level == 0 else -math.inf
            return beta, "auto-degenerate", None

    def fit(self, X, y=None):
        if self.mode not in ("manifold", "full_dimensional"):
            raise InvalidArgument(f"mode must be 'manifold' or 'full_dimensional', got {self.mode!r}")
        index = _index_of(X)
        n = index.n
        provenance = {}
        d, provenance["dim"], self.dimension_ = self._resolve_dim(index)
        self.beta_estimate_ = None
        if self.k == "auto":
            beta, provenance["beta"], self.beta_estimate_ = self._resolve_beta(index, d)
            k = tuning.choose_k(n, d, beta, self.eps0, self.k_l, self.remark_exponent)
            provenance["k"] = "auto"
        else:
            beta, provenance["beta"] = (None if self.beta is None else float(self.beta)), "unused"
            k = int(self.k)
            provenance["k"] = "explicit"
        cfg = tuning.TuningConfig(
            level=self.level, k=k, d=d, delta=self.delta, c0=self.c0,
            slack_override=self.slack, eps0=self.eps0, k_l=self.k_l, k_u=self.k_u,
        )
        eps = tuning.epsilon_for_level(cfg, n)
        if self.prune:
            eps_tilde = tuning.epsilon_tilde(cfg, n)
            pruned = prune_false_clusters(index, k, eps, eps_tilde)
            result = pruned.clustering
            self.merge_map_ = pruned.merge_map
        else:
            eps_tilde = None
            result = dbscan_cluster(index, k, eps)
        self.config_ = cfg
        self.provenance_ = provenance
        self.dim_ = d
        self.beta_ = beta
        self.k_ = k
        self.eps_ = eps
        self.eps_tilde_ = eps_tilde
        self.slack_ = tuning.slack(cfg, n)
        self.clustering_ = result
        self.labels_ = result.labels
        self.core_sample_indices_ = result.core_indices
        self.n_clusters_ = result.n_clusters
        self.n_samples_ = n
        return self

    def report(self):
        """Resolved parameters and their provenance as plain JSON types."""
        check_is_fitted(self, "labels_")
        cfg = self.config_
        out = {
            "n": self.n_samples_,
            "level": cfg.level,
            "delta": cfg.delta,
            "c0": cfg.c0,
            "slack_override": cfg.slack_override,
            "slack": self.slack_,
            "k": self.k_,
            "dim": self.dim_,
            "beta_hat": self.beta_,
            "eps": self.eps_,
            "eps_tilde": self.eps_tilde_,
            "prune": bool(self.prune),
            "mode": self.mode,
            "eps0": self.eps0,
            "k_l": self.k_l,
            "remark_exponent": bool(self.remark_exponent),
            "cluster_count": self.n_clusters_,
            "noise_count": int((self.labels_ < 0).sum()),
            "provenance": dict(self.provenance_),
        }
        if self.dimension_ is not None:
            out["dimension_estimate"] = self.dimension_.to_dict()
        if self.beta_estimate_ is not None:
            out["beta_estimate"] = self.beta_estimate_.to_dict()
        return out

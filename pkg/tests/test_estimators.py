import json
import math

import numpy as np
import pytest
from sklearn.base import clone

from levelset import tuning
from levelset.dbscan import NOISE, dbscan_cluster
from levelset.density import knn_density_all
from levelset.estimators import DBSCAN, IntrinsicDimension, KNNDensity, LevelSetDBSCAN
from levelset.exceptions import InfeasibleK, InvalidArgument
from levelset.geometry import NeighborIndex
from levelset.io import dumps
from levelset.synthdata import Circle


def blobs(n=600, seed=0):
    rng = np.random.default_rng(seed)
    half = n // 2
    return np.vstack([rng.normal(0.0, 0.3, (half, 2)), rng.normal(0.0, 0.3, (n - half, 2)) + [4.0, 0.0]])


def test_get_params_and_clone():
    est = LevelSetDBSCAN(level=0.2, k=30, dim=2, prune=True)
    params = est.get_params()
    assert params["level"] == 0.2 and params["k"] == 30 and params["prune"] is True
    copy = clone(est)
    assert copy.get_params() == params and copy is not est
    est.set_params(c0=0.01)
    assert est.c0 == 0.01


def test_dbscan_estimator_matches_function():
    X = blobs()
    est = DBSCAN(eps=0.3, min_pts=8).fit(X)
    ref = dbscan_cluster(NeighborIndex(X), 8, 0.3)
    assert np.array_equal(est.labels_, ref.labels)
    assert np.array_equal(est.core_sample_indices_, ref.core_indices)
    assert np.array_equal(DBSCAN(eps=0.3, min_pts=8).fit_predict(X), ref.labels)


def test_knn_density_estimator():
    X = blobs()
    est = KNNDensity(k=10)
    f = est.fit_transform(X)
    assert np.array_equal(f, knn_density_all(NeighborIndex(X), 10, 2))
    # scoring the fit sample at external points uses the same index
    g = est.score_samples(np.array([[0.0, 0.0], [50.0, 50.0]]))
    assert g[0] > g[1] > 0


def test_intrinsic_dimension_estimator():
    c = Circle(1.0, 4)
    X = c.embed(c.sample_uniform(np.random.Generator(np.random.Philox(2)), 3000))
    assert IntrinsicDimension(k=50).fit(X).dim_ == 1


def test_explicit_k_and_dim_echo():
    X = blobs()
    est = LevelSetDBSCAN(level=0.3, k=20, dim=2).fit(X)
    cfg = tuning.TuningConfig(level=0.3, k=20, d=2.0)
    assert est.k_ == 20 and est.dim_ == 2
    assert abs(est.eps_ - tuning.epsilon_for_level(cfg, len(X))) <= 1e-12
    rep = est.report()
    assert rep["provenance"] == {"dim": "explicit", "beta": "unused", "k": "explicit"}
    assert rep["k"] == 20 and rep["dim"] == 2 and rep["eps"] == est.eps_
    json.loads(dumps(rep))
    ref = dbscan_cluster(NeighborIndex(X), 20, est.eps_)
    assert np.array_equal(est.labels_, ref.labels)


def test_auto_pipeline_on_blobs():
    X = blobs(2000, 1)
    level = 0.05
    est = LevelSetDBSCAN(level=level, prune=True)
    labels = est.fit_predict(X)
    assert est.provenance_["k"] == "auto" and est.provenance_["dim"] == "auto"
    assert est.dim_ == 2
    assert est.n_clusters_ == 2
    assert set(np.unique(labels)) <= {NOISE, 0, 1}
    # each blob keeps one label
    assert len(set(labels[:1000]) - {NOISE}) == 1 and len(set(labels[1000:]) - {NOISE}) == 1
    assert est.eps_tilde_ > est.eps_
    rep = est.report()
    assert rep["cluster_count"] == 2 and "beta_estimate" in rep and "dimension_estimate" in rep


def test_full_dimensional_mode_uses_ambient_dim():
    X = blobs()
    est = LevelSetDBSCAN(level=0.1, k=20, mode="full_dimensional").fit(X)
    assert est.dim_ == 2 and est.provenance_["dim"] == "ambient"
    with pytest.raises(InvalidArgument):
        LevelSetDBSCAN(mode="other").fit(X)


def test_slack_above_one_is_infeasible():
    with pytest.raises(InfeasibleK):
        LevelSetDBSCAN(level=0.1, k=20, dim=2, slack=1.5).fit(blobs())


def test_prune_never_increases_count():
    X = blobs(800, 3)
    plain = LevelSetDBSCAN(level=0.2, k=15, dim=2).fit(X)
    pruned = LevelSetDBSCAN(level=0.2, k=15, dim=2, prune=True).fit(X)
    assert pruned.n_clusters_ <= plain.n_clusters_
    assert np.array_equal(pruned.labels_ == NOISE, plain.labels_ == NOISE)
    assert math.isfinite(pruned.eps_tilde_)

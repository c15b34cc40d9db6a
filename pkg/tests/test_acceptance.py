"""Acceptance criteria, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as they
are produced; they are also repeated in the terminal summary. Criteria 5-7
are slow (several minutes each on one core).
"""

import itertools
import json
import os
import subprocess
import sys
import time

import numpy as np
import pytest

import oracles
from acceptance_log import record
from datasets import PLATEAU_RADIUS, cone_spec, two_plateau_doc
from levelset import tuning
from levelset.dbscan import NOISE, dbscan_cluster
from levelset.density import knn_density_all
from levelset.evaluation import hausdorff, optimal_assignment
from levelset.experiment import fit_loglog_slope, plan_from_dict, run_experiment, run_trial
from levelset.geometry import NeighborIndex
from levelset.pruning import merge_clusters, prune_false_clusters
from levelset.synthdata import Circle, DensitySpec, Sphere2, compute_Dr_oracle, normalize, sample_dataset
from levelset.tuning import TuningConfig


def _dbscan_mismatches(X, min_pts, eps):
    """Count disagreements with the brute-force definitions."""
    c = dbscan_cluster(NeighborIndex(X), min_pts, eps)
    core, parts, nearest = oracles.dbscan(X, min_pts, eps)
    bad = int(set(np.flatnonzero(c.core_flags).tolist()) != core)
    bad += int(oracles.partition_of(c.labels.tolist(), sorted(core)) != parts)
    label_of_part = {}
    for part in parts:
        label_of_part[part] = c.labels[min(part)]
    for i, j in nearest.items():
        if j is None:
            bad += int(c.labels[i] != NOISE)
            continue
        bad += int(c.labels[i] != c.labels[j])
    # sandwich: each cluster holds its core class and lies within eps of it
    for part, lab in label_of_part.items():
        members = np.flatnonzero(c.labels == lab)
        bad += int(not part <= set(members.tolist()))
        bad += sum(not any(oracles.dist(X[i], X[j]) <= eps for j in part) for i in members)
    return bad


def test_1_dbscan_oracle_equivalence():
    rng = np.random.default_rng(1001)
    start = time.perf_counter()
    bad = 0
    for t in range(200):
        n = int(rng.integers(1, 201))
        D = int(rng.integers(1, 4))
        if t % 2:
            X = rng.integers(0, 12, size=(n, D)).astype(float).tolist()
            eps = float(rng.integers(1, 4))
        else:
            X = rng.uniform(0, 10, size=(n, D)).tolist()
            eps = float(rng.uniform(0.2, 3.0))
        bad += _dbscan_mismatches(X, int(rng.integers(1, min(n, 12) + 1)), eps)
    took = time.perf_counter() - start
    ok = bad == 0 and took < 30
    record(1, "DBSCAN oracle equivalence", ok, f"200 instances, {bad} mismatches, {took:.1f} s")
    assert ok


def test_2_geometry_oracle_equivalence():
    rng = np.random.default_rng(1002)
    bad = 0
    for t in range(500):
        n, D = int(rng.integers(1, 120)), int(rng.integers(1, 4))
        if t % 2:
            # lattice points force exact distance ties
            X = rng.integers(-3, 4, size=(n, D)).astype(float)
            q = rng.integers(-3, 4, size=D).astype(float)
        else:
            X = rng.standard_normal((n, D))
            q = rng.standard_normal(D)
        idx, Xl, ql = NeighborIndex(X), X.tolist(), q.tolist()
        k = int(rng.integers(1, n + 1))
        r = oracles.kth(Xl, ql, k)
        bad += int(idx.kth_neighbor_distance(q, k) != r)
        eps = r if t % 3 else float(rng.uniform(0, 3))
        bad += int(idx.radius_neighbors(q, eps).tolist() != oracles.radius(Xl, ql, eps))
    record(2, "geometry oracle equivalence", bad == 0, f"500 k-NN + 500 radius queries, {bad} mismatches")
    assert bad == 0


def test_3_level_vertex_duality():
    rng = np.random.default_rng(1003)
    exceptions = 0
    for _ in range(100):
        n, D = int(rng.integers(10, 300)), int(rng.integers(1, 4))
        idx = NeighborIndex(rng.standard_normal((n, D)) * float(rng.uniform(0.1, 10)))
        cfg = TuningConfig(level=float(rng.uniform(0.001, 2)), k=int(rng.integers(1, n + 1)), d=D,
                           slack_override=float(rng.uniform(0, 0.95)))
        eps = tuning.epsilon_for_level(cfg, n)
        vertex = idx.self_kth_distances(cfg.k) <= eps
        f = knn_density_all(idx, cfg.k, D)
        exceptions += int(np.sum(vertex != (f >= cfg.level * (1 - tuning.slack(cfg, n)))))
    record(3, "level/vertex duality", exceptions == 0, f"100 pairs, {exceptions} exceptions")
    assert exceptions == 0


def _frame(seed, D):
    Q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((D, D)))
    return Q


def test_4_dimension_estimation():
    start = time.perf_counter()
    hits = {}
    for name, manifold, truth in (
        ("circle", Circle(1.0, 5, rotation=_frame(41, 5)), 1),
        ("sphere", Sphere2(1.0, 5, rotation=_frame(42, 5)), 2),
    ):
        spec = normalize(DensitySpec(manifold, floor=1.0).validate())
        hits[name] = 0
        for seed in range(10):
            X = sample_dataset(spec, 5000, seed).cloud
            hits[name] += tuning.estimate_dimension(NeighborIndex(X), 100).d_hat_rounded == truth
    took = time.perf_counter() - start
    ok = hits["circle"] >= 9 and hits["sphere"] >= 9 and took < 60
    record(4, "dimension estimation", ok,
           f"circle {hits['circle']}/10, sphere {hits['sphere']}/10, {took:.1f} s")
    assert ok


def _nonincreasing(xs):
    return all(b <= a for a, b in zip(xs, xs[1:]))


@pytest.mark.slow
def test_5_beta_estimation_trend():
    # reduced k_beta schedule so n = 2e5 fits the time budget on one core
    spec = normalize(cone_spec())
    lam = spec.suggested_level
    start = time.perf_counter()
    beta_gap, d_gap = [], []
    for n in (2000, 20000, 200000):
        k, r = tuning.beta_schedule(n, k_scale=0.002)
        oracle = compute_Dr_oracle(spec, lam, r)
        bs, ds = [], []
        for seed in range(5):
            est = tuning.estimate_beta(NeighborIndex(sample_dataset(spec, n, seed).cloud), lam, 2, k, r)
            bs.append(abs(est.beta_hat - 1))
            ds.append(abs(est.d_hat_level - oracle))
        beta_gap.append(float(np.median(bs)))
        d_gap.append(float(np.median(ds)))
    took = time.perf_counter() - start
    ok = _nonincreasing(beta_gap) and _nonincreasing(d_gap) and took < 600
    fmt = lambda xs: " / ".join(f"{x:.3f}" for x in xs)  # noqa: E731
    record(5, "beta estimation trend", ok,
           f"median |beta-1| {fmt(beta_gap)}, median |D_hat-D_r| {fmt(d_gap)}, {took:.0f} s")
    assert ok


@pytest.mark.slow
def test_6_end_to_end_recovery():
    cap = 0.15 * PLATEAU_RADIUS
    start = time.perf_counter()
    bijections = successes = 0
    worst = []
    for seed in range(10):
        row, _ = run_trial(two_plateau_doc(), 20000, seed, {}, True, "full_dimensional")
        good = row["error"] is None and row["cluster_count"] == 2 and row["bijection"]
        bijections += bool(good)
        successes += bool(good and all(e <= cap for e in row["hausdorff_errors"]))
        worst.append(row["max_error"])
    took = time.perf_counter() - start
    ok = successes >= 8 and took < 300
    record(6, "end-to-end recovery", ok,
           f"2 clusters + bijection {bijections}/10, all errors <= {cap:g} in {successes}/10, "
           f"worst error {max(worst):.3f}, {took:.0f} s")
    assert ok


@pytest.mark.slow
def test_7_rate_trend():
    plan = plan_from_dict({"spec": two_plateau_doc(), "n_values": [2000, 8000, 32000],
                           "seeds": list(range(10)), "prune": True, "mode": "full_dimensional"})
    start = time.perf_counter()
    rows, _ = run_experiment(plan)
    took = time.perf_counter() - start
    medians = [float(np.median([r["max_error"] for r in rows if r["n"] == n and r["error"] is None]))
               for n in plan.n_values]
    slope = fit_loglog_slope(plan.n_values, medians)
    decreasing = all(b < a for a, b in zip(medians, medians[1:]))
    ok = decreasing and -0.6 <= slope <= -0.05 and took < 600
    record(7, "rate trend", ok,
           f"medians {' / '.join(f'{m:.4f}' for m in medians)}, slope {slope:.3f} "
           f"(theory -0.25), {took:.0f} s")
    assert ok


def test_8_pruning_algebra():
    four = NeighborIndex([[0.0], [0.5], [1.2], [1.7]])
    p = prune_false_clusters(four, 2, 0.6, 0.8)
    example = (dbscan_cluster(four, 2, 0.6).labels.tolist() == [0, 0, 1, 1]
               and p.labels.tolist() == [0, 0, 0, 0] and p.merge_map == {0: 0, 1: 0})
    rng = np.random.default_rng(1008)
    bad = 0
    for _ in range(100):
        n = int(rng.integers(5, 150))
        idx = NeighborIndex(rng.uniform(0, 10, size=(n, int(rng.integers(1, 3)))))
        k, eps = int(rng.integers(1, 6)), float(rng.uniform(0.2, 1.5))
        eps_t = eps * float(rng.uniform(1.0, 2.0))
        fine = dbscan_cluster(idx, k, eps)
        pr = prune_false_clusters(idx, k, eps, eps_t)
        bad += int(not np.array_equal(pr.labels == NOISE, fine.labels == NOISE))
        bad += sum(int(np.any(pr.labels[fine.labels == c] != pr.merge_map[c])) for c in range(fine.n_clusters))
        injective = len(set(pr.merge_map.values())) == len(pr.merge_map)
        bad += int(pr.n_clusters > fine.n_clusters or (pr.n_clusters == fine.n_clusters) != injective)
        again, _ = merge_clusters(pr.clustering, pr.coarse)
        bad += int(not again.same_as(pr.clustering))
    ok = example and bad == 0
    record(8, "pruning algebra", ok, f"4-point example {'ok' if example else 'wrong'}, "
                                     f"100 instances, {bad} violations")
    assert ok


def test_9_metric_properties():
    rng = np.random.default_rng(1009)
    bad = 0
    for _ in range(200):
        D = int(rng.integers(1, 4))
        A, B, C = (rng.integers(-4, 5, size=(int(rng.integers(1, 40)), D)).astype(float) for _ in range(3))
        ab = hausdorff(A, B)
        bad += int(ab != hausdorff(B, A))
        bad += int(hausdorff(A, C) > ab + hausdorff(B, C) + 1e-12)
        bad += int(hausdorff(A, A) != 0)
    for _ in range(100):
        m = int(rng.integers(1, 6))
        cost = rng.uniform(0, 1, size=(m, m))
        best = sum(cost[i, j] for i, j in optimal_assignment(cost))
        bad += int(any(best > sum(cost[i, p[i]] for i in range(m)) + 1e-12
                       for p in itertools.permutations(range(m))))
    record(9, "metric properties", bad == 0, f"200 triples + 100 assignments, {bad} violations")
    assert bad == 0


def _cli(*args, cwd):
    env = dict(os.environ, PYTHONHASHSEED="random")
    proc = subprocess.run([sys.executable, "-m", "levelset", *args], cwd=cwd, env=env,
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


def _run_all(d, jobs):
    d.mkdir()
    (d / "spec.json").write_text(json.dumps(two_plateau_doc()))
    _cli("synth", "--spec", "spec.json", "--n", "3000", "--seed", "5", "--out", "pts.csv",
         "--truth", "truth.json", cwd=d)
    lam = repr(json.loads((d / "truth.json").read_text())["lambda"])
    _cli("cluster", "--input", "pts.csv", "--level", lam, "--prune", "--labels", "labels.csv",
         "--report", "report.json", cwd=d)
    (d / "dim.json").write_text(_cli("estimate-dim", "--input", "pts.csv", "--k", "50", cwd=d))
    (d / "beta.json").write_text(_cli("estimate-beta", "--input", "pts.csv", "--level", lam, cwd=d))
    _cli("eval", "--labels", "labels.csv", "--truth", "truth.json", "--points", "pts.csv",
         "--out", "eval.json", cwd=d)
    plan = {"spec": "spec.json", "n_values": [400, 800], "seeds": [3, 1, 2, 0], "mode": "full_dimensional"}
    (d / "plan.json").write_text(json.dumps(plan))
    _cli("experiment", "--plan", "plan.json", "--jobs", str(jobs), "--results", "results.csv",
         "--summary", "summary.json", cwd=d)
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_10_determinism(tmp_path):
    runs = [_run_all(tmp_path / "a", 1), _run_all(tmp_path / "b", 1), _run_all(tmp_path / "c", 4)]
    names = sorted(runs[0])
    differing = [name for name in names if len({r[name] for r in runs}) != 1]
    ok = not differing and all(sorted(r) == names for r in runs)
    record(10, "determinism", ok, f"{len(names)} files over 3 runs (jobs 1, 1, 4), "
                                  f"differing: {differing or 'none'}")
    assert ok

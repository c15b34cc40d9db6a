"""Rate-sweep experiments: synthesize, cluster and evaluate over (n, seed) grids."""

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import tuning
from .estimators import LevelSetDBSCAN
from .evaluation import match_clusters, rate_exponent, theoretical_error_bound
from .exceptions import InputError, LevelSetError, SpecValidationError
from .io import read_json
from .synthdata import normalize, sample_dataset, spec_from_dict

TUNING_KEYS = {
    "level", "delta", "c0", "slack", "k", "dim", "eps0", "k_l", "k_u",
    "k_beta", "beta_radius", "beta", "dim_k", "density_quantile", "remark_exponent",
}
ROW_FIELDS = [
    "n", "seed", "k_used", "eps_used", "d_used", "beta_hat", "cluster_count",
    "bijection", "hausdorff_errors", "max_error", "theoretical_bound", "error",
]


@dataclass
class ExperimentPlan:
    spec: dict
    n_values: list
    seeds: list
    tuning: dict = field(default_factory=dict)
    prune: bool = True
    mode: str = "manifold"
    outputs: dict = field(default_factory=dict)

    def validate(self):
        if not self.n_values or any(int(n) != n or n < 3 for n in self.n_values):
            raise SpecValidationError("n_values", "must be a nonempty list of integers >= 3")
        if any(b <= a for a, b in zip(self.n_values, self.n_values[1:])):
            raise SpecValidationError("n_values", "must be strictly increasing")
        if len(self.seeds) < 3 or len(set(self.seeds)) != len(self.seeds):
            raise SpecValidationError("seeds", "need at least 3 distinct seeds")
        if any(not isinstance(s, int) or isinstance(s, bool) or s < 0 for s in self.seeds):
            raise SpecValidationError("seeds", "must be nonnegative integers")
        unknown = set(self.tuning) - TUNING_KEYS
        if unknown:
            raise SpecValidationError("tuning", f"unknown keys {sorted(unknown)}")
        if self.mode not in ("manifold", "full_dimensional"):
            raise SpecValidationError("mode", "must be manifold or full_dimensional")
        spec_from_dict(self.spec)
        return self


def plan_from_dict(doc, base_dir="."):
    if not isinstance(doc, dict):
        raise SpecValidationError("<root>", "plan must be a JSON object")
    spec = doc.get("spec")
    if isinstance(spec, str):
        spec = read_json(os.path.join(base_dir, spec))
    if not isinstance(spec, dict):
        raise SpecValidationError("spec", "must be a density spec object or a path to one")
    for key in ("n_values", "seeds"):
        if not isinstance(doc.get(key), list):
            raise SpecValidationError(key, "must be a list")
    return ExperimentPlan(
        spec=spec,
        n_values=list(doc["n_values"]),
        seeds=list(doc["seeds"]),
        tuning=dict(doc.get("tuning", {})),
        prune=bool(doc.get("prune", True)),
        mode=doc.get("mode", "manifold"),
        outputs=dict(doc.get("outputs", {})),
    ).validate()


def run_trial(spec_doc, n, seed, tuning_doc, prune, mode):
    """One synth -> cluster -> eval pass; returns (row, seconds)."""
    start = time.perf_counter()
    row = {key: None for key in ROW_FIELDS}
    row.update(n=n, seed=seed)
    try:
        spec = normalize(spec_from_dict(spec_doc))
        ds = sample_dataset(spec, n, seed)
        params = dict(tuning_doc)
        params.setdefault("level", ds.suggested_lambda)
        est = LevelSetDBSCAN(prune=prune, mode=mode, **params).fit(ds.cloud)
        cdn = tuning.c_delta_n(est.config_.c0, est.config_.delta, n, est.dim_)
        bound = None
        if math.isfinite(ds.true_beta) and math.isfinite(ds.c_beta):
            bound = theoretical_error_bound(est.config_.level, ds.c_beta, ds.true_beta, cdn, est.k_)
        report = match_clusters(est.labels_, ds.cloud, ds.truth_points, resolution=ds.resolution,
                                theoretical_bound=bound)
        row.update(
            k_used=est.k_, eps_used=est.eps_, d_used=est.dim_, beta_hat=est.beta_,
            cluster_count=est.n_clusters_, bijection=report.bijection,
            hausdorff_errors=report.errors, max_error=report.max_error, theoretical_bound=bound,
        )
    except LevelSetError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row, time.perf_counter() - start


def fit_loglog_slope(ns, errors):
    """Least-squares slope of log(error) against log(n); NaN with < 2 usable points."""
    x, y = [], []
    for n, e in zip(ns, errors):
        if e is not None and math.isfinite(e) and e > 0:
            x.append(math.log(n))
            y.append(math.log(e))
    if len(x) < 2:
        return float("nan")
    x, y = np.asarray(x), np.asarray(y)
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))


def summarize(plan, rows):
    spec = normalize(spec_from_dict(plan.spec))
    medians = []
    for n in plan.n_values:
        errs = [r["max_error"] for r in rows
                if r["n"] == n and r["error"] is None and r["max_error"] is not None
                and math.isfinite(r["max_error"])]
        medians.append(float(np.median(errs)) if errs else float("nan"))
    m = spec.manifold
    at = [spec.bumps[i] for i in (spec.level_bumps(spec.suggested_level) or [])] or list(spec.bumps)
    beta = min((b.decay_exponent for b in at), default=float("nan"))
    full = plan.mode == "full_dimensional"
    dim = m.ambient_dim if full else m.intrinsic_dim
    theory = rate_exponent(dim, beta, full) if math.isfinite(beta) else float("nan")
    return {
        "n_values": list(plan.n_values),
        "seeds": list(plan.seeds),
        "median_error": medians,
        "slope": fit_loglog_slope(plan.n_values, medians),
        "rate_exponent": theory,
        "failed_trials": sum(r["error"] is not None for r in rows),
        "bijection_rate": [
            float(np.mean([bool(r["bijection"]) for r in rows if r["n"] == n])) for n in plan.n_values
        ],
        "mode": plan.mode,
        "prune": plan.prune,
        "tuning": plan.tuning,
    }


def _trial_args(plan):
    return [(plan.spec, n, s, plan.tuning, plan.prune, plan.mode)
            for n in plan.n_values for s in plan.seeds]


def _call(args):
    return run_trial(*args)


def run_experiment(plan, jobs=1):
    """Run every (n, seed) trial; returns (rows sorted by (n, seed), timings)."""
    args = _trial_args(plan)
    if jobs <= 1:
        results = [_call(a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_call, args))
    order = sorted(range(len(args)), key=lambda i: (args[i][1], args[i][2]))
    rows = [results[i][0] for i in order]
    timings = [{"n": args[i][1], "seed": args[i][2], "seconds": results[i][1]} for i in order]
    return rows, timings


def format_row(row):
    out = []
    for key in ROW_FIELDS:
        v = row[key]
        if v is None:
            out.append("")
        elif key == "hausdorff_errors":
            out.append(";".join(repr(float(e)) for e in v))
        elif isinstance(v, bool):
            out.append(str(int(v)))
        elif isinstance(v, float):
            out.append(repr(v))
        else:
            out.append(str(v).replace(",", ";").replace("\n", " "))
    return ",".join(out)


def write_results(path, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(ROW_FIELDS) + "\n")
        for row in rows:
            fh.write(format_row(row) + "\n")


def jobs_default():
    raw = os.environ.get("LEVELSET_JOBS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"LEVELSET_JOBS must be an integer, got {raw!r}") from None
    return max(1, value)

"""Command line: synth, cluster, estimate-dim, estimate-beta, eval, experiment.

Exit codes: 0 success, 2 bad input, 3 infeasible or degenerate computation.
"""

import argparse
import os
import sys

from . import io, tuning
from .dbscan import Clustering
from .estimators import LevelSetDBSCAN
from .evaluation import match_clusters
from .exceptions import InfeasibleK, InputError, LevelSetError
from .experiment import jobs_default, plan_from_dict, run_experiment, summarize, write_results
from .geometry import NeighborIndex
from .synthdata import normalize, sample_dataset, spec_from_dict


def _auto_int(text):
    if text == "auto":
        return text
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'auto', got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _emit(obj, out):
    text = io.dumps(obj)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_synth(args):
    spec = normalize(spec_from_dict(io.read_json(args.spec)), args.quadrature)
    ds = sample_dataset(spec, args.n, args.seed, args.resolution)
    io.write_points(args.out, ds.cloud)
    if args.truth:
        io.write_json(args.truth, io.truth_document(ds))
    return 0


def _tuning_kwargs(args):
    return dict(
        level=args.level, delta=args.delta, c0=args.c0, k=args.k, dim=args.dim,
        slack=args.slack, prune=args.prune, mode=args.mode, eps0=args.eps0,
        k_l=args.k_l, k_u=args.k_u, k_beta=args.k_beta, beta_radius=args.beta_radius,
        beta=args.beta, remark_exponent=args.remark_exponent,
    )


def cmd_cluster(args):
    if not args.level > 0:
        raise InputError("--level must be positive")
    X = io.read_points(args.input)
    try:
        est = LevelSetDBSCAN(**_tuning_kwargs(args)).fit(X)
    except InfeasibleK as exc:
        raise InfeasibleK(f"{exc} (try a larger --k, a smaller --c0, or --slack below 1)") from None
    io.write_labels(args.labels, est.labels_, est.clustering_.core_flags)
    if args.report:
        io.write_json(args.report, est.report())
    return 0


def cmd_estimate_dim(args):
    index = NeighborIndex(io.read_points(args.input))
    est = tuning.estimate_dimension(index, args.k, args.density_quantile)
    _emit({**est.to_dict(), "k": args.k, "density_quantile": args.density_quantile}, args.out)
    return 0


def cmd_estimate_beta(args):
    index = NeighborIndex(io.read_points(args.input))
    if args.dim == "auto":
        d = tuning.estimate_dimension(index, min(100, max(1, index.n // 4))).d_hat_rounded
    else:
        d = args.dim
    est = tuning.estimate_beta(index, args.level, d, args.k_beta, args.r)
    _emit({**est.to_dict(), "level": args.level, "dim": d}, args.out)
    return 0


def cmd_eval(args):
    points = io.read_points(args.points)
    labels, core = io.read_labels(args.labels)
    if len(labels) != len(points):
        raise InputError(f"labels file has {len(labels)} rows but points file has {len(points)}")
    doc, truth = io.read_truth(args.truth)
    if any(T.ndim != 2 or T.shape[1] != points.shape[1] for T in truth):
        raise InputError("truth components and points differ in dimension")
    report = match_clusters(Clustering(labels, core, 0, 0.0), points, truth,
                            resolution=doc.get("resolution"))
    _emit(report.to_dict(), args.out)
    return 0


def cmd_experiment(args):
    plan = plan_from_dict(io.read_json(args.plan), os.path.dirname(os.path.abspath(args.plan)))
    jobs = args.jobs if args.jobs is not None else jobs_default()
    rows, timings = run_experiment(plan, jobs)
    results = args.results or plan.outputs.get("results", "results.csv")
    summary = args.summary or plan.outputs.get("summary", "summary.json")
    write_results(results, rows)
    io.write_json(summary, summarize(plan, rows))
    if args.timings:
        io.write_json(args.timings, timings)
    if all(r["error"] is not None for r in rows):
        print("error: every trial failed; see the error column", file=sys.stderr)
        return 3
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="levelset", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="sample a synthetic dataset from a density spec")
    s.add_argument("--spec", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True, help="points CSV")
    s.add_argument("--truth", help="truth JSON")
    s.add_argument("--resolution", type=float, help="pitch of truth samples")
    s.add_argument("--quadrature", type=int, help="grid nodes per dimension for Z")
    s.set_defaults(func=cmd_synth)

    c = sub.add_parser("cluster", help="estimate level-set clusters")
    c.add_argument("--input", required=True)
    c.add_argument("--level", type=float, required=True)
    c.add_argument("--delta", type=float, default=tuning.DEFAULT_DELTA)
    c.add_argument("--k", type=_auto_int, default="auto")
    c.add_argument("--dim", type=_auto_int, default="auto")
    c.add_argument("--c0", type=float, default=tuning.DEFAULT_C0)
    c.add_argument("--slack", type=float, help="replaces C^2/sqrt(k) in the radius")
    c.add_argument("--prune", action="store_true")
    c.add_argument("--mode", choices=["manifold", "full_dimensional"], default="manifold")
    c.add_argument("--eps0", type=float, default=tuning.DEFAULT_EPS0)
    c.add_argument("--k-l", dest="k_l", type=float, default=1.0)
    c.add_argument("--k-u", dest="k_u", type=float, default=1.0)
    c.add_argument("--k-beta", dest="k_beta", type=int)
    c.add_argument("--beta-radius", dest="beta_radius", type=float)
    c.add_argument("--beta", type=float, help="use this beta instead of estimating it")
    c.add_argument("--remark-exponent", action="store_true",
                   help="pick k with exponent b'/(2b'+d) instead of 2b'/(2b'+d)")
    c.add_argument("--labels", required=True, help="labels CSV")
    c.add_argument("--report", help="report JSON")
    c.set_defaults(func=cmd_cluster)

    d = sub.add_parser("estimate-dim", help="intrinsic dimension estimate")
    d.add_argument("--input", required=True)
    d.add_argument("--k", type=int, default=100)
    d.add_argument("--density-quantile", dest="density_quantile", type=float, default=0.5)
    d.add_argument("--out")
    d.set_defaults(func=cmd_estimate_dim)

    b = sub.add_parser("estimate-beta", help="boundary regularity estimate")
    b.add_argument("--input", required=True)
    b.add_argument("--level", type=float, required=True)
    b.add_argument("--dim", type=_auto_int, default="auto")
    b.add_argument("--k-beta", dest="k_beta", type=int)
    b.add_argument("--r", type=float)
    b.add_argument("--out")
    b.set_defaults(func=cmd_estimate_beta)

    e = sub.add_parser("eval", help="Hausdorff evaluation against truth components")
    e.add_argument("--labels", required=True)
    e.add_argument("--truth", required=True)
    e.add_argument("--points", required=True)
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    x = sub.add_parser("experiment", help="run a rate sweep")
    x.add_argument("--plan", required=True)
    x.add_argument("--jobs", type=int, help="worker processes (default: $LEVELSET_JOBS or 1)")
    x.add_argument("--results")
    x.add_argument("--summary")
    x.add_argument("--timings", help="optional JSON with per-trial wall time")
    x.set_defaults(func=cmd_experiment)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LevelSetError as exc:
        field = getattr(exc, "field", None)
        where = f" [{field}]" if field else ""
        print(f"error: {type(exc).__name__}{where}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())

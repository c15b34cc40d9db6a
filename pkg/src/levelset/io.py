"""CSV and JSON file formats."""

import csv
import json
import math

import numpy as np

from .exceptions import InputError
from .geometry import check_cloud


def _fmt(x):
    # repr gives the shortest string that round-trips a float64
    return repr(float(x))


def write_points(path, X):
    X = np.asarray(X, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(f"x{j}" for j in range(X.shape[1])) + "\n")
        for row in X:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_points(path):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise InputError(f"{path}: empty file")
    header = rows[0]
    if header != [f"x{j}" for j in range(len(header))]:
        raise InputError(f"{path}: header must be x0,...,x{{D-1}}, got {','.join(header)}")
    body = [r for r in rows[1:] if r]
    try:
        data = np.array([[float(v) for v in r] for r in body], dtype=np.float64)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    if data.size and data.shape[1] != len(header):
        raise InputError(f"{path}: rows must have {len(header)} values")
    if any(len(r) != len(header) for r in body):
        raise InputError(f"{path}: ragged rows")
    return check_cloud(data.reshape(len(body), len(header)))


def write_labels(path, labels, core_flags):
    with open(path, "w", newline="") as fh:
        fh.write("point_id,label,is_core\n")
        for i, (lab, core) in enumerate(zip(labels, core_flags)):
            fh.write(f"{i},{int(lab)},{int(bool(core))}\n")


def read_labels(path):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    if not rows or rows[0] != ["point_id", "label", "is_core"]:
        raise InputError(f"{path}: header must be point_id,label,is_core")
    body = [r for r in rows[1:] if r]
    try:
        ids = [int(r[0]) for r in body]
        labels = np.array([int(r[1]) for r in body], dtype=np.intp)
        core = np.array([int(r[2]) != 0 for r in body], dtype=bool)
    except (ValueError, IndexError) as exc:
        raise InputError(f"{path}: {exc}") from None
    if ids != list(range(len(body))):
        raise InputError(f"{path}: point_id must run 0..n-1 in order")
    if np.any(labels < -1):
        raise InputError(f"{path}: labels must be >= -1")
    return labels, core


def jsonable(obj):
    """Recursively convert numpy values; NaN becomes null and infinities strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(obj):
    return json.dumps(jsonable(obj), indent=2, allow_nan=False) + "\n"


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps(obj))


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def truth_document(dataset):
    return {
        "lambda": dataset.suggested_lambda,
        "components": [
            {"id": i, "analytic": c.analytic, "points": c.points}
            for i, c in enumerate(dataset.truth_components)
        ],
        "resolution": dataset.resolution,
        "spec_echo": dataset.spec.to_dict(),
        "Z": dataset.spec.Z,
        "seed": dataset.seed,
        "n": len(dataset.cloud),
        "true_dim": dataset.true_dim,
        "true_beta": dataset.true_beta,
        "c_beta": dataset.c_beta,
        "nominal_tau": dataset.spec.manifold.nominal_tau,
    }


def read_truth(path):
    doc = read_json(path)
    try:
        comps = [np.asarray(c["points"], dtype=np.float64) for c in doc["components"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: malformed truth document ({exc})") from None
    return doc, comps

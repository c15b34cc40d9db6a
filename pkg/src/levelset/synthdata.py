"""Synthetic densities with known level sets.

A density is a floor plus "plateau-power" bumps: height ``h`` within domain
distance ``a`` of the bump center, then ``h - c (s - a)^beta`` until it
meets the floor. At the plateau level lambda = h / Z the level set is the
union of plateau regions, and lambda - f = (c / Z) d(x, C)^beta holds with
equality just outside them, so the regularity exponent and constants are
known exactly.

Domains are the circle and the 2-sphere (rigidly embedded in R^D) and
axis-aligned boxes in R^D. Points are handled internally in canonical
coordinates (R^2 for the circle, R^3 for the sphere, R^D for boxes) and
embedded only on output.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .dbscan import _components_of
from .exceptions import (
    EmptyLevelSet,
    InvalidArgument,
    NonFiniteIntegral,
    OffManifold,
    RejectionStall,
    SpecValidationError,
    UnsupportedLevel,
)
from .geometry import squared_norm

_CHUNK = 1 << 20
_LEVEL_RTOL = 1e-12


def _fail(field_name, message):
    raise SpecValidationError(field_name, message)


def _steps(length, pitch):
    # the margin keeps float spacing strictly at or below the pitch
    return math.ceil(length / pitch * (1 + 1e-9))


def _unit(v):
    return v / np.sqrt(squared_norm(v))[..., None]


# -- domains ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _Embedded:
    """Shared rigid-embedding logic for curved domains."""

    radius: float = 1.0
    ambient_dim: int = 2
    rotation: Optional[np.ndarray] = None
    offset: Optional[np.ndarray] = None

    def _validate_embedding(self, base_dim):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            _fail("manifold.radius", "must be positive")
        if int(self.ambient_dim) != self.ambient_dim or self.ambient_dim < base_dim:
            _fail("manifold.ambient_dim", f"must be an integer >= {base_dim}")
        D = int(self.ambient_dim)
        if self.rotation is not None:
            Q = np.asarray(self.rotation, dtype=float)
            if Q.shape != (D, D) or not np.allclose(Q @ Q.T, np.eye(D), atol=1e-9):
                _fail("manifold.rotation", f"must be an orthogonal {D}x{D} matrix")
        if self.offset is not None:
            o = np.asarray(self.offset, dtype=float)
            if o.shape != (D,) or not np.all(np.isfinite(o)):
                _fail("manifold.offset", f"must be a finite vector of length {D}")

    @property
    def nominal_tau(self):
        return self.radius

    def embed(self, P):
        P = np.asarray(P, dtype=float)
        X = np.zeros((P.shape[0], int(self.ambient_dim)))
        X[:, : P.shape[1]] = P
        if self.rotation is not None:
            X = X @ np.asarray(self.rotation, dtype=float).T
        if self.offset is not None:
            X = X + np.asarray(self.offset, dtype=float)
        return X

    def to_canonical(self, X, tol=1e-9):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.ambient_dim:
            raise OffManifold(f"expected {self.ambient_dim} coordinates")
        Y = X - (0 if self.offset is None else np.asarray(self.offset, dtype=float))
        if self.rotation is not None:
            Y = Y @ np.asarray(self.rotation, dtype=float)
        base = self.canonical_dim
        scale = tol * max(1.0, self.radius)
        if np.any(np.abs(Y[:, base:]) > scale):
            raise OffManifold("point lies outside the embedding subspace")
        P = Y[:, :base]
        if np.any(np.abs(np.sqrt(squared_norm(P)) - self.radius) > scale):
            raise OffManifold(f"point is not at distance {self.radius} from the center")
        return P

    def euclid_to_domain(self, r):
        """Geodesic length of a chord of Euclidean length r."""
        return 2 * self.radius * math.asin(min(1.0, r / (2 * self.radius)))

    def distance(self, P, c):
        """Geodesic distance from canonical points P to canonical point c."""
        dot = P @ c
        if P.shape[1] == 2:
            cross_norm = np.abs(P[:, 0] * c[1] - P[:, 1] * c[0])
        else:
            cross_norm = np.sqrt(squared_norm(np.cross(P, c)))
        return self.radius * np.arctan2(cross_norm, dot)

    def _embedding_dict(self):
        return {
            "ambient_dim": int(self.ambient_dim),
            "rotation": None if self.rotation is None else np.asarray(self.rotation).tolist(),
            "offset": None if self.offset is None else np.asarray(self.offset).tolist(),
        }


@dataclass(frozen=True, eq=False)
class Circle(_Embedded):
    kind = "circle"
    intrinsic_dim = 1
    canonical_dim = 2
    center_len = 1

    def validate(self):
        self._validate_embedding(2)

    @property
    def volume(self):
        return 2 * math.pi * self.radius

    def center_point(self, center):
        (theta,) = center
        return self.radius * np.array([math.cos(theta), math.sin(theta)])

    def from_angles(self, theta):
        return self.radius * np.column_stack([np.cos(theta), np.sin(theta)])

    def sample_uniform(self, rng, m):
        return self.from_angles(rng.uniform(0.0, 2 * math.pi, m))

    def quadrature_nodes(self, N):
        """Periodic trapezoid nodes and weights (arc-length measure)."""
        theta = 2 * math.pi * np.arange(N) / N
        yield self.from_angles(theta), np.full(N, self.volume / N)

    def default_quadrature(self):
        return 1 << 16

    def grid(self, pitch):
        N = max(8, _steps(self.volume, pitch))
        return self.from_angles(2 * math.pi * np.arange(N) / N), 1.5 * self.volume / N

    def ball_samples(self, center, a, pitch):
        (theta,) = center
        half = min(a / self.radius, math.pi)
        m = max(2, _steps(2 * a, pitch) + 1)
        return self.from_angles(theta + np.linspace(-half, half, m))

    def descriptor(self, center, a):
        return {"kind": "arc", "center_angle": float(center[0]),
                "half_angle": a / self.radius, "radius": self.radius}

    def to_dict(self):
        return {"kind": self.kind, "radius": self.radius, **self._embedding_dict()}


@dataclass(frozen=True, eq=False)
class Sphere2(_Embedded):
    kind = "sphere2"
    intrinsic_dim = 2
    canonical_dim = 3
    center_len = 2

    def __post_init__(self):
        if self.ambient_dim == 2:
            object.__setattr__(self, "ambient_dim", 3)

    def validate(self):
        self._validate_embedding(3)

    @property
    def volume(self):
        return 4 * math.pi * self.radius**2

    def center_point(self, center):
        polar, azimuth = center
        return self.radius * np.array([
            math.sin(polar) * math.cos(azimuth),
            math.sin(polar) * math.sin(azimuth),
            math.cos(polar),
        ])

    def sample_uniform(self, rng, m):
        return self.radius * _unit(rng.standard_normal((m, 3)))

    def quadrature_nodes(self, N):
        """Midpoint in polar angle, periodic trapezoid in azimuth."""
        dphi = math.pi / N
        dtheta = 2 * math.pi / (2 * N)
        theta = dtheta * np.arange(2 * N)
        R = self.radius
        for i in range(N):
            phi = (i + 0.5) * dphi
            ring = R * np.column_stack([
                math.sin(phi) * np.cos(theta), math.sin(phi) * np.sin(theta),
                np.full(2 * N, math.cos(phi)),
            ])
            yield ring, np.full(2 * N, R * R * math.sin(phi) * dphi * dtheta)

    def default_quadrature(self):
        return 2000

    def _rings(self, c, max_angle, pitch, include_pole=True):
        R = self.radius
        c = c / np.linalg.norm(c)
        helper = np.array([1.0, 0.0, 0.0]) if abs(c[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        u = np.cross(c, helper)
        u /= np.linalg.norm(u)
        v = np.cross(c, u)
        n_rings = max(1, _steps(max_angle * R, pitch))
        out = [R * c[None, :]] if include_pole else []
        for psi in np.linspace(0.0, max_angle, n_rings + 1)[1:]:
            m = max(1, _steps(2 * math.pi * R * math.sin(psi), pitch))
            phi = 2 * math.pi * np.arange(m) / m
            ring = math.cos(psi) * c + math.sin(psi) * (
                np.cos(phi)[:, None] * u + np.sin(phi)[:, None] * v
            )
            out.append(R * ring)
        return np.vstack(out)

    def grid(self, pitch):
        north = np.array([0.0, 0.0, 1.0])
        return self._rings(north, math.pi, pitch), 1.5 * pitch

    def ball_samples(self, center, a, pitch):
        return self._rings(self.center_point(center), min(a / self.radius, math.pi), pitch)

    def descriptor(self, center, a):
        return {"kind": "cap", "center": [float(x) for x in center],
                "angle": a / self.radius, "radius": self.radius}

    def to_dict(self):
        return {"kind": self.kind, "radius": self.radius, **self._embedding_dict()}


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned box [low, high] in R^D with Euclidean distance."""

    low: tuple
    high: tuple
    kind = "full_dim"
    nominal_tau = None

    @property
    def dim(self):
        return len(self.low)

    ambient_dim = property(lambda self: self.dim)
    intrinsic_dim = property(lambda self: self.dim)
    canonical_dim = property(lambda self: self.dim)
    center_len = property(lambda self: self.dim)

    def validate(self):
        lo, hi = np.asarray(self.low, float), np.asarray(self.high, float)
        if lo.ndim != 1 or lo.size == 0 or lo.shape != hi.shape:
            _fail("manifold.low", "low and high must be vectors of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(lo < hi)):
            _fail("manifold.high", "must be finite and strictly above low")

    @property
    def volume(self):
        return float(np.prod(np.asarray(self.high) - np.asarray(self.low)))

    def center_point(self, center):
        return np.asarray(center, dtype=float)

    def embed(self, P):
        return np.asarray(P, dtype=float)

    def to_canonical(self, X, tol=1e-9):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise OffManifold(f"expected {self.dim} coordinates")
        if np.any(X < np.asarray(self.low) - tol) or np.any(X > np.asarray(self.high) + tol):
            raise OffManifold("point lies outside the box")
        return X

    def euclid_to_domain(self, r):
        return r

    def distance(self, P, c):
        return np.sqrt(squared_norm(P - c))

    def sample_uniform(self, rng, m):
        lo, hi = np.asarray(self.low, float), np.asarray(self.high, float)
        return lo + (hi - lo) * rng.random((m, self.dim))

    def _axes(self, N):
        lo, hi = np.asarray(self.low, float), np.asarray(self.high, float)
        return [lo[j] + (hi[j] - lo[j]) * (np.arange(N) + 0.5) / N for j in range(self.dim)]

    def quadrature_nodes(self, N):
        """Tensor midpoint rule, streamed along the first axis."""
        if self.dim > 3:
            raise InvalidArgument("tensor-grid quadrature supports boxes of dimension <= 3")
        axes = self._axes(N)
        w = self.volume / N**self.dim
        rest = np.stack(np.meshgrid(*axes[1:], indexing="ij"), -1).reshape(-1, self.dim - 1) \
            if self.dim > 1 else np.empty((1, 0))
        for x0 in axes[0]:
            pts = np.column_stack([np.full(len(rest), x0), rest])
            yield pts, np.full(len(rest), w)

    def default_quadrature(self):
        return {1: 1 << 16, 2: 2000}.get(self.dim, 1000)

    def _lattice(self, lo, hi, pitch):
        axes = [np.linspace(a, b, max(2, _steps(b - a, pitch) + 1)) for a, b in zip(lo, hi)]
        step = max(float(ax[1] - ax[0]) for ax in axes)
        return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, len(axes)), step

    def grid(self, pitch):
        pts, step = self._lattice(self.low, self.high, pitch)
        return pts, 1.5 * step

    def ball_samples(self, center, a, pitch):
        c = np.asarray(center, float)
        if a == 0:
            return c[None, :]
        pts, _ = self._lattice(c - a, c + a, pitch)
        inside = pts[np.sqrt(squared_norm(pts - c)) <= a]
        boundary = _sphere_boundary(c, a, pitch)
        out = np.vstack([inside, boundary]) if boundary is not None else inside
        lo, hi = np.asarray(self.low), np.asarray(self.high)
        return out[np.all((out >= lo) & (out <= hi), axis=1)]

    def descriptor(self, center, a):
        return {"kind": "ball", "center": [float(x) for x in center], "radius": a}

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim, "low": list(map(float, self.low)),
                "high": list(map(float, self.high))}


def _sphere_boundary(c, a, pitch):
    D = len(c)
    if D == 1:
        return np.array([[c[0] - a], [c[0] + a]])
    if D == 2:
        m = max(8, _steps(2 * math.pi * a, pitch))
        phi = 2 * math.pi * np.arange(m) / m
        return c + a * np.column_stack([np.cos(phi), np.sin(phi)])
    if D == 3:
        return c + Sphere2(radius=a, ambient_dim=3)._rings(np.array([0.0, 0.0, 1.0]), math.pi, pitch)
    return None


# -- density spec -----------------------------------------------------------


@dataclass(frozen=True)
class Bump:
    center: tuple
    plateau_radius: float
    height: float
    decay_coefficient: float
    decay_exponent: float = 1.0
    floor: float = 0.0

    def profile(self, s):
        s = np.asarray(s, dtype=float)
        out = np.full(s.shape, float(self.height))
        out_side = s > self.plateau_radius
        t = s[out_side] - self.plateau_radius
        out[out_side] = np.maximum(
            self.floor, self.height - self.decay_coefficient * t**self.decay_exponent
        )
        return out

    def decay_range(self, global_floor=0.0):
        base = max(global_floor, self.floor)
        return ((self.height - base) / self.decay_coefficient) ** (1 / self.decay_exponent)

    def to_dict(self):
        return {
            "center": [float(x) for x in self.center],
            "plateau_radius": self.plateau_radius,
            "height": self.height,
            "decay_coefficient": self.decay_coefficient,
            "decay_exponent": self.decay_exponent,
            "floor": self.floor,
        }


@dataclass(frozen=True)
class DensitySpec:
    """Unnormalized profile max(floor, max over bumps) on a domain.

    ``Z`` is filled in by :func:`normalize`; ``Z_error`` is the Richardson
    estimate of its quadrature error.
    """

    manifold: object
    bumps: tuple = ()
    floor: float = 0.0
    valley_width: float = 0.0
    valley_gap: float = 0.0
    Z: Optional[float] = None
    Z_error: Optional[float] = field(default=None, compare=False)

    def validate(self):
        m = self.manifold
        m.validate()
        if not (self.floor >= 0 and math.isfinite(self.floor)):
            _fail("floor", "must be finite and nonnegative")
        if not self.bumps and self.floor <= 0:
            _fail("floor", "must be positive when there are no bumps")
        for i, b in enumerate(self.bumps):
            name = f"bumps[{i}]"
            if len(b.center) != m.center_len:
                _fail(f"{name}.center", f"needs {m.center_len} coordinates for {m.kind}")
            if not all(math.isfinite(x) for x in b.center):
                _fail(f"{name}.center", "must be finite")
            for attr, ok in [
                ("plateau_radius", b.plateau_radius >= 0),
                ("height", b.height > 0),
                ("decay_coefficient", b.decay_coefficient > 0),
                ("decay_exponent", b.decay_exponent > 0),
                ("floor", 0 <= b.floor < b.height),
            ]:
                if not ok or not math.isfinite(getattr(b, attr)):
                    _fail(f"{name}.{attr}", f"invalid value {getattr(b, attr)!r}")
            if m.kind == "full_dim":
                c = np.asarray(b.center)
                if np.any(c < np.asarray(m.low)) or np.any(c > np.asarray(m.high)):
                    _fail(f"{name}.center", "must lie inside the box")
            if b.height - self.floor < self.valley_gap or b.height <= self.floor:
                _fail("floor", f"must sit below bump {i} height by at least valley_gap")
        centers = [m.center_point(b.center) for b in self.bumps]
        for i in range(len(self.bumps)):
            for j in range(i + 1, len(self.bumps)):
                gap = float(m.distance(centers[i][None, :], centers[j])[0])
                gap -= self.bumps[i].plateau_radius + self.bumps[j].plateau_radius
                if not gap > self.valley_width:
                    _fail(f"bumps[{j}].center",
                          f"plateau boundaries of bumps {i} and {j} are {gap:.6g} apart; "
                          f"need more than valley_width={self.valley_width}")
        return self

    @property
    def max_unnormalized(self):
        return max([self.floor] + [b.height for b in self.bumps])

    def unnormalized(self, P):
        P = np.asarray(P, dtype=float)
        out = np.full(P.shape[0], float(self.floor))
        for b in self.bumps:
            s = self.manifold.distance(P, self.manifold.center_point(b.center))
            np.maximum(out, b.profile(s), out=out)
        return out

    def density(self, P):
        if self.Z is None:
            raise InvalidArgument("density spec is not normalized; call normalize() first")
        return self.unnormalized(P) / self.Z

    def level_bumps(self, level):
        """Indices of bumps whose plateau sits at ``level``, or None if some bump exceeds it."""
        at = []
        for i, b in enumerate(self.bumps):
            hb = b.height / self.Z
            if math.isclose(hb, level, rel_tol=_LEVEL_RTOL):
                at.append(i)
            elif hb > level:
                return None
        return at

    @property
    def suggested_level(self):
        if not self.bumps:
            return self.floor / self.Z
        return min(b.height for b in self.bumps) / self.Z

    def to_dict(self):
        return {
            "manifold": self.manifold.to_dict(),
            "bumps": [b.to_dict() for b in self.bumps],
            "floor": self.floor,
            "valley_width": self.valley_width,
            "valley_gap": self.valley_gap,
        }


def _num(d, key, where, default=None, kind=float):
    if key not in d:
        if default is not None:
            return default
        _fail(f"{where}{key}", "missing")
    v = d[key]
    try:
        if isinstance(v, bool) or v is None:
            raise TypeError
        return kind(v)
    except (TypeError, ValueError):
        _fail(f"{where}{key}", f"expected a number, got {v!r}")


def spec_from_dict(doc):
    """Build and validate a :class:`DensitySpec` from its JSON form."""
    if not isinstance(doc, dict):
        _fail("<root>", "expected a JSON object")
    man = doc.get("manifold")
    if not isinstance(man, dict):
        _fail("manifold", "missing or not an object")
    kind = man.get("kind")
    if kind in ("circle", "sphere2"):
        cls = Circle if kind == "circle" else Sphere2
        manifold = cls(
            radius=_num(man, "radius", "manifold.", 1.0),
            ambient_dim=_num(man, "ambient_dim", "manifold.", 2 if kind == "circle" else 3, int),
            rotation=None if man.get("rotation") is None else np.asarray(man["rotation"], float),
            offset=None if man.get("offset") is None else np.asarray(man["offset"], float),
        )
    elif kind == "full_dim":
        for key in ("low", "high"):
            if not isinstance(man.get(key), list):
                _fail(f"manifold.{key}", "expected a list of numbers")
        manifold = Box(low=tuple(map(float, man["low"])), high=tuple(map(float, man["high"])))
        if "dim" in man and man["dim"] != len(man["low"]):
            _fail("manifold.dim", "does not match the length of low/high")
    else:
        _fail("manifold.kind", f"unknown kind {kind!r} (circle, sphere2, full_dim)")
    bumps = []
    raw = doc.get("bumps", [])
    if not isinstance(raw, list):
        _fail("bumps", "expected a list")
    for i, b in enumerate(raw):
        where = f"bumps[{i}]."
        if not isinstance(b, dict):
            _fail(f"bumps[{i}]", "expected an object")
        center = b.get("center")
        if not isinstance(center, list):
            _fail(f"{where}center", "expected a list of numbers")
        bumps.append(Bump(
            center=tuple(float(x) for x in center),
            plateau_radius=_num(b, "plateau_radius", where),
            height=_num(b, "height", where),
            decay_coefficient=_num(b, "decay_coefficient", where),
            decay_exponent=_num(b, "decay_exponent", where, 1.0),
            floor=_num(b, "floor", where, 0.0),
        ))
    spec = DensitySpec(
        manifold=manifold,
        bumps=tuple(bumps),
        floor=_num(doc, "floor", "", 0.0),
        valley_width=_num(doc, "valley_width", "", 0.0),
        valley_gap=_num(doc, "valley_gap", "", 0.0),
    )
    return spec.validate()


# -- operations -------------------------------------------------------------


def _integrate(spec, N):
    total = 0.0
    for pts, w in spec.manifold.quadrature_nodes(N):
        for s in range(0, len(pts), _CHUNK):
            total += float(np.dot(spec.unnormalized(pts[s:s + _CHUNK]), w[s:s + _CHUNK]))
    return total


def normalize(spec, quadrature_resolution=None):
    """Return ``spec`` with Z set to the integral of its unnormalized profile.

    Two grid levels are combined by Richardson extrapolation; their
    difference is kept as ``Z_error``.
    """
    N = quadrature_resolution or spec.manifold.default_quadrature()
    if N < 1000:
        raise InvalidArgument("quadrature_resolution must be at least 1000 nodes per dimension")
    fine = _integrate(spec, N)
    coarse = _integrate(spec, N // 2)
    Z = (4 * fine - coarse) / 3
    if not (math.isfinite(Z) and Z > 0):
        raise NonFiniteIntegral(f"normalizing constant is {Z}")
    return replace(spec, Z=Z, Z_error=abs(fine - coarse) / 3)


def _ensure_normalized(spec):
    return spec if spec.Z is not None else normalize(spec)


def true_density(spec, x, tol=1e-9):
    """Normalized density at ambient point(s) ``x``."""
    spec = _ensure_normalized(spec)
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    P = spec.manifold.to_canonical(x.reshape(1, -1) if single else x, tol)
    f = spec.density(P)
    return float(f[0]) if single else f


@dataclass
class TruthComponent:
    points: np.ndarray
    analytic: Optional[dict] = None


def _default_resolution(manifold):
    if manifold.kind == "full_dim":
        return 0.005 * float(np.min(np.asarray(manifold.high) - np.asarray(manifold.low)))
    return 0.005 * manifold.radius


def ground_truth_components(spec, level, resolution=None):
    """Connected components of {f >= level} as dense ambient point sets.

    At a plateau level the components are the plateau regions, sampled
    directly (interior and boundary) with an analytic descriptor. Any other
    level is resolved by thresholding a grid of pitch ``resolution`` and
    linking neighboring grid nodes.
    """
    spec = _ensure_normalized(spec)
    m = spec.manifold
    pitch = resolution or _default_resolution(m)
    if level > spec.max_unnormalized / spec.Z * (1 + _LEVEL_RTOL):
        raise EmptyLevelSet(f"level {level} exceeds the maximum density {spec.max_unnormalized / spec.Z}")
    at = spec.level_bumps(level) if spec.bumps else None
    if at and level * spec.Z > spec.floor:
        comps = []
        for i in at:
            b = spec.bumps[i]
            pts = m.ball_samples(b.center, b.plateau_radius, pitch)
            comps.append(TruthComponent(m.embed(pts), m.descriptor(b.center, b.plateau_radius)))
        return comps
    G, link = m.grid(pitch)
    keep = G[spec.density(G) >= level]
    if len(keep) == 0:
        raise EmptyLevelSet(f"no grid node reaches level {level}; refine the resolution")
    if len(keep) == len(G):
        # every supported domain is connected
        return [TruthComponent(m.embed(keep))]
    labels = _components_of(keep, link)
    return [TruthComponent(m.embed(keep[labels == c])) for c in range(labels.max() + 1)]


def compute_Dr_oracle(spec, level, r):
    """Population level deviation at radius r for a plateau level: (c/Z) s^beta.

    ``s`` is the domain length spanned by a Euclidean radius r (r itself on
    boxes). The value is the minimum over the plateau bumps at ``level``.
    """
    spec = _ensure_normalized(spec)
    at = spec.level_bumps(level) if spec.bumps else None
    if not at:
        raise UnsupportedLevel(f"level {level} is not a plateau level of this density")
    s = spec.manifold.euclid_to_domain(float(r))
    values = []
    for i in at:
        b = spec.bumps[i]
        if s > b.decay_range(spec.floor):
            raise UnsupportedLevel(
                f"r={r} reaches past the decay range {b.decay_range(spec.floor):.6g} of bump {i}"
            )
        values.append(b.decay_coefficient / spec.Z * s**b.decay_exponent)
    return min(values)


@dataclass
class SyntheticDataset:
    cloud: np.ndarray
    true_density_at_points: np.ndarray
    spec: DensitySpec
    seed: int
    suggested_lambda: float
    true_dim: int
    true_beta: float
    c_beta: float
    truth_components: list
    resolution: float
    canonical: np.ndarray = field(repr=False, default=None)

    @property
    def truth_points(self):
        return [c.points for c in self.truth_components]


def sample_dataset(spec, n, seed, resolution=None):
    """Draw n i.i.d. points by rejection from uniform proposals on the domain."""
    if int(n) != n or n < 1:
        raise InvalidArgument(f"n must be a positive integer, got {n}")
    n = int(n)
    spec = _ensure_normalized(spec)
    m = spec.manifold
    gmax = spec.max_unnormalized
    rate = spec.Z / (m.volume * gmax)
    if rate < 1e-4:
        raise RejectionStall(f"expected acceptance rate {rate:.3g} is below 1e-4")
    rng = np.random.Generator(np.random.Philox(int(seed)))
    batch = int(min(1 << 20, max(1024, math.ceil(1.2 * n / rate))))
    kept, total = [], 0
    while total < n:
        P = m.sample_uniform(rng, batch)
        u = rng.random(batch)
        acc = P[u * gmax <= spec.unnormalized(P)]
        kept.append(acc)
        total += len(acc)
    P = np.vstack(kept)[:n]
    level = spec.suggested_level
    pitch = resolution or _default_resolution(m)
    at = spec.level_bumps(level) if spec.bumps else []
    ref = [spec.bumps[i] for i in at] or list(spec.bumps)
    return SyntheticDataset(
        cloud=m.embed(P),
        true_density_at_points=spec.density(P),
        spec=spec,
        seed=int(seed),
        suggested_lambda=level,
        true_dim=int(m.intrinsic_dim),
        true_beta=min((b.decay_exponent for b in ref), default=float("nan")),
        c_beta=min((b.decay_coefficient / spec.Z for b in ref), default=float("nan")),
        truth_components=ground_truth_components(spec, level, pitch),
        resolution=pitch,
        canonical=P,
    )

"""Discrete probability measures: generators, projections, mass queries, file I/O.

A measure is a finite weighted point set with weights summing to 1.  These
stand in for smooth fast-decaying densities; tests that depend on smoothness
(median uniqueness, continuity) are phrased statistically instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    DEFAULT_TOL,
    Flat,
    HalfSpace,
    SimplicialCone,
    as_vector,
    complement_basis,
    cone_contains_many,
)

WEIGHT_SUM_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finite weighted point set in R^dim; weights strictly positive, summing to 1."""

    dim: int
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("measure needs at least one point")
        if pts.shape[1] != self.dim:
            raise ValueError(f"points have dim {pts.shape[1]}, expected {self.dim}")
        if w.shape != (pts.shape[0],):
            raise ValueError("weights shape does not match point count")
        if not np.all(np.isfinite(pts)) or not np.all(np.isfinite(w)):
            raise ValueError("non-finite point or weight")
        if np.any(w <= 0):
            raise ValueError("weights must be strictly positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {w.sum()!r}, expected 1")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        self.points.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def translated(self, shift) -> "DiscreteMeasure":
        return DiscreteMeasure(self.dim, self.points + as_vector(shift), self.weights)

    def rotated(self, r: np.ndarray) -> "DiscreteMeasure":
        return DiscreteMeasure(self.dim, self.points @ np.asarray(r, dtype=float).T, self.weights)

    def reweighted(self, new_weights) -> "DiscreteMeasure":
        return make_measure(self.points, new_weights)


def make_measure(points, weights=None) -> DiscreteMeasure:
    """Build a measure from points and nonnegative weights.

    Zero-weight points are dropped; weights are normalized to sum 1.
    Weights default to uniform.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError("need at least one point")
    n = pts.shape[0]
    if weights is None:
        w = np.full(n, 1.0 / n)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (n,):
            raise ValueError(f"{n} points but {w.size} weights")
        if np.any(w < 0):
            raise ValueError("negative weight")
        keep = w > 0
        if not np.any(keep):
            raise ValueError("all weights are zero")
        pts, w = pts[keep], w[keep]
        w = w / w.sum()
        if np.any(w <= 0):  # denormal inputs can underflow to 0 here
            keep = w > 0
            pts, w = pts[keep], w[keep]
            w = w / w.sum()
    return DiscreteMeasure(pts.shape[1], pts, w)


def simplex_vertices(dim: int) -> np.ndarray:
    """Vertices of a regular simplex in R^dim, centered at 0, unit circumradius."""
    d = dim
    e = np.eye(d + 1)
    centered = e - e.mean(axis=0)
    # orthonormal basis of the hyperplane sum(x)=0 in R^(d+1)
    q, _ = np.linalg.qr(centered.T[:, :d])
    verts = centered @ q
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    return verts


def cross_polytope_vertices(dim: int) -> np.ndarray:
    return np.vstack([np.eye(dim), -np.eye(dim)])


@dataclass(frozen=True)
class MeasureSpec:
    """Recipe for a generated measure; generation is a pure function of the spec."""

    kind: str
    dim: int
    n: int = 1
    params: dict = field(default_factory=dict)
    seed: int = 0

    KINDS = ("simplex_mixture", "gaussian", "uniform_ball", "cross_polytope", "point_masses", "file")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown measure kind {self.kind!r}; valid: {', '.join(self.KINDS)}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        sigma = self.params.get("sigma")
        if sigma is not None and sigma <= 0:
            raise ValueError("sigma must be positive")


def _round_robin_assign(n: int, k: int) -> np.ndarray:
    """Cluster labels 0..k-1 cycling, so cluster sizes differ by at most 1."""
    return np.arange(n) % k


def generate_measure(spec: MeasureSpec) -> DiscreteMeasure:
    """Deterministic measure generation; bitwise identical for identical specs."""
    rng = np.random.default_rng(spec.seed)
    d, n = spec.dim, spec.n
    kind = spec.kind
    if kind == "simplex_mixture":
        sigma = float(spec.params.get("sigma", 0.01))
        verts = simplex_vertices(d)
        labels = _round_robin_assign(n, d + 1)
        pts = verts[labels] + sigma * rng.standard_normal((n, d))
        return make_measure(pts)
    if kind == "gaussian":
        sigma = float(spec.params.get("sigma", 1.0))
        scales = np.asarray(spec.params.get("scales", np.ones(d)), dtype=float)
        pts = sigma * rng.standard_normal((n, d)) * scales
        return make_measure(pts)
    if kind == "uniform_ball":
        radius = float(spec.params.get("radius", 1.0))
        g = rng.standard_normal((n, d))
        g /= np.linalg.norm(g, axis=1)[:, None]
        r = radius * rng.random(n) ** (1.0 / d)
        return make_measure(g * r[:, None])
    if kind == "cross_polytope":
        sigma = spec.params.get("sigma")
        verts = cross_polytope_vertices(d)
        labels = _round_robin_assign(n, 2 * d)
        pts = verts[labels].astype(float)
        if sigma is not None:
            pts = pts + float(sigma) * rng.standard_normal((n, d))
        return make_measure(pts)
    if kind == "point_masses":
        return make_measure(spec.params["points"], spec.params.get("weights"))
    if kind == "file":
        return load_measure(spec.params["path"])
    raise ValueError(f"unknown measure kind {kind!r}")


def project_measure(m: DiscreteMeasure, f: Flat) -> DiscreteMeasure:
    """Push-forward of m under orthogonal projection along the flat f.

    Weights are unchanged; the output lives in R^(dim - k) in the coordinates
    of ``complement_basis(f)``.
    """
    if f.dim != m.dim:
        raise ValueError(f"flat ambient dim {f.dim} != measure dim {m.dim}")
    comp = complement_basis(f)
    return DiscreteMeasure(m.dim - f.k, m.points @ comp.T, m.weights)


def halfspace_mass(m: DiscreteMeasure, h: HalfSpace, tol: float = DEFAULT_TOL) -> float:
    """Mass of the closed half-space; boundary points (within tol) count."""
    if h.dim != m.dim:
        raise ValueError(f"half-space dim {h.dim} != measure dim {m.dim}")
    s = m.points @ h.normal - h.offset
    return float(m.weights[s <= tol].sum())


def cone_mass(m: DiscreteMeasure, b: SimplicialCone, tol: float = DEFAULT_TOL) -> float:
    """Mass of the closed simplicial cone."""
    if b.dim != m.dim:
        raise ValueError(f"cone dim {b.dim} != measure dim {m.dim}")
    return float(m.weights[cone_contains_many(b, m.points, tol)].sum())


def save_measure(m: DiscreteMeasure, path) -> None:
    """Write the measure as UTF-8 JSON with full float round-trip precision."""
    obj = {
        "dim": m.dim,
        "points": [[float(f"{x:.17g}") for x in p] for p in m.points],
        "weights": [float(f"{w:.17g}") for w in m.weights],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)
        fh.write("\n")


def load_measure(path) -> DiscreteMeasure:
    """Load a measure from JSON, validating shape and weight normalization."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as e:
            raise ValueError(f"malformed measure file {path}: line {e.lineno}, col {e.colno}: {e.msg}") from e
    for key in ("dim", "points"):
        if key not in obj:
            raise ValueError(f"measure file {path}: missing field {key!r}")
    dim = int(obj["dim"])
    raw_pts = obj["points"]
    if not raw_pts:
        raise ValueError(f"measure file {path}: empty point list")
    for i, p in enumerate(raw_pts):
        if len(p) != dim:
            raise ValueError(
                f"measure file {path}: point index {i} has {len(p)} coordinates, expected {dim}"
            )
    pts = np.asarray(raw_pts, dtype=float)
    if "weights" in obj and obj["weights"] is not None:
        w = np.asarray(obj["weights"], dtype=float)
        if w.shape != (pts.shape[0],):
            raise ValueError(
                f"measure file {path}: {pts.shape[0]} points but {w.size} weights"
            )
        total = float(w.sum())
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(
                f"measure file {path}: weights sum to {total}, expected 1 within {WEIGHT_SUM_TOL}"
            )
        w = w / total
    else:
        w = np.full(pts.shape[0], 1.0 / pts.shape[0])
    return DiscreteMeasure(dim, pts, w)


def measure_io(path, direction: str, measure: DiscreteMeasure | None = None):
    """Unified load/save entry point; ``direction`` is "load" or "save"."""
    if direction == "load":
        return load_measure(path)
    if direction == "save":
        if measure is None:
            raise ValueError("save requires a measure")
        save_measure(measure, path)
        return None
    raise ValueError(f"unknown direction {direction!r}")

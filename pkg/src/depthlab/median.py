"""Tukey median search, minimizing-normal sets, witness tuple extraction, recentering.

The median search is exact in the plane (arrangement mode) and a seeded
multistart ascent elsewhere; reported depths come from the exact evaluator
where that is affordable (dim <= 3, or small n in dim 4) and from the
certified net lower bound otherwise, so a reported depth never overstates
the true one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .geometry import DEFAULT_TOL, hull_interior_margin, sample_directions, unit
from .measures import DiscreteMeasure, halfspace_mass
from .depth import certified_depth_floor, exact_depth_value_2d, point_depth
from . import cones as _cones

ARRANGEMENT_MAX_N = 200
_EXACT4_MAX_N = 120


@dataclass(frozen=True, eq=False)
class MedianResult:
    point: np.ndarray
    depth: float
    candidates_evaluated: int


@dataclass(frozen=True, eq=False)
class NormalSet:
    normals: np.ndarray  # (k, d) unit rows
    level: float


class WitnessSearchError(RuntimeError):
    """No qualifying half-space tuple found; carries the best margin seen."""

    def __init__(self, msg: str, best_margin: float):
        super().__init__(msg)
        self.best_margin = best_margin


def _final_depth(m: DiscreteMeasure, x: np.ndarray) -> float:
    """Best affordable certified depth value at x (exact where feasible)."""
    if m.dim == 2:
        return exact_depth_value_2d(m, x)[0]
    if m.dim <= 3 or m.n <= _EXACT4_MAX_N:
        return point_depth(m, x, mode="exact").depth
    return certified_depth_floor(m, x, gamma=0.1)


def _cheap_depth(m: DiscreteMeasure, x: np.ndarray, seed: int):
    """Fast evaluator used inside the ascent; exact in the plane."""
    if m.dim == 2:
        return exact_depth_value_2d(m, x)
    if m.dim == 1:
        r = point_depth(m, x, mode="exact")
    else:
        r = point_depth(m, x, mode="sampled", sample_count=192, seed=seed)
    return r.depth, r.witness


def _lex_less(a: np.ndarray, b: np.ndarray) -> bool:
    for x, y in zip(a, b):
        if x != y:
            return x < y
    return False


def _arrangement_median(m: DiscreteMeasure, tol: float):
    """Exact planar median: evaluate depth at every intersection of lines
    through data-point pairs, plus the data points themselves."""
    pts = m.points
    n = pts.shape[0]
    cands = [pts[i] for i in range(n)]
    lines = []
    for i, j in itertools.combinations(range(n), 2):
        d = pts[j] - pts[i]
        nr = float(np.linalg.norm(d))
        if nr > tol:
            nvec = np.array([-d[1], d[0]]) / nr
            lines.append((nvec, float(nvec @ pts[i])))
    for (n1, c1), (n2, c2) in itertools.combinations(lines, 2):
        det = n1[0] * n2[1] - n1[1] * n2[0]
        if abs(det) < 1e-12:
            continue
        x = np.array([(c1 * n2[1] - c2 * n1[1]) / det, (n1[0] * c2 - n2[0] * c1) / det])
        cands.append(x)
    # dedupe on a fine grid to avoid re-evaluating coincident vertices
    seen = set()
    uniq = []
    for x in cands:
        key = (round(x[0] / 1e-9), round(x[1] / 1e-9))
        if key not in seen:
            seen.add(key)
            uniq.append(x)
    best_x, best_d = None, -1.0
    for x in uniq:
        dep = point_depth(m, x, mode="exact").depth
        if dep > best_d + 1e-12 or (
            abs(dep - best_d) <= 1e-12 and best_x is not None and _lex_less(x, best_x)
        ):
            best_x, best_d = x, dep
    return MedianResult(best_x, best_d, len(uniq))


def _start_points(m: DiscreteMeasure, starts: int, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    out = [m.weights @ m.points, np.median(m.points, axis=0)]
    k = max(0, starts - len(out))
    if k:
        idx = rng.integers(0, m.n, size=k)
        out.extend(m.points[i] for i in idx)
    return out[:starts]


def tukey_median(
    m: DiscreteMeasure,
    mode: str = "auto",
    starts: int = 16,
    iters: int = 30,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> MedianResult:
    """Search for a depth-maximizing point.

    arrangement  (dim = 2, n <= 200) exact: scans all arrangement vertices.
    multistart   seeded starts refined by witness descent: step against the
                 minimizing half-space normal with a shrinking step size.
    auto         arrangement for small planar inputs, else multistart.

    Deterministic in the seed; ties broken toward the lexicographically
    smallest evaluated candidate.
    """
    if mode == "auto":
        mode = "arrangement" if (m.dim == 2 and m.n <= 40) else "multistart"
    if mode == "arrangement":
        if m.dim != 2 or m.n > ARRANGEMENT_MAX_N:
            raise ValueError(f"arrangement mode requires dim=2 and n <= {ARRANGEMENT_MAX_N}")
        return _arrangement_median(m, tol)
    if mode not in ("multistart", "grid"):
        raise ValueError(f"unknown budget mode {mode!r}")

    if m.dim == 1:
        cands = np.unique(m.points[:, 0])
        best_x, best_d = None, -1.0
        for c in cands:
            dep = point_depth(m, [c], mode="exact").depth
            if dep > best_d:
                best_x, best_d = np.array([c]), dep
        return MedianResult(best_x, best_d, cands.size)

    endpoints, evals = _multistart_endpoints(m, starts, iters, seed)
    finals = 3 if m.dim <= 2 else 1  # final evaluations are costly in d >= 3
    best_x, best_d = None, -1.0
    for _, x in endpoints[: min(finals, len(endpoints))]:
        dep = _final_depth(m, x)
        evals += 1
        if dep > best_d + 1e-12 or (
            abs(dep - best_d) <= 1e-12 and best_x is not None and _lex_less(x, best_x)
        ):
            best_x, best_d = x, dep
    return MedianResult(best_x, float(best_d), evals)


def _multistart_endpoints(m: DiscreteMeasure, starts: int, iters: int, seed: int):
    """Witness-descent ascent from seeded starts; endpoints sorted by the
    cheap depth estimate, best first."""
    evals = 0
    scale = float(np.mean(np.linalg.norm(m.points - m.weights @ m.points, axis=1))) or 1.0
    endpoints = []
    for s_i, x0 in enumerate(_start_points(m, starts, seed)):
        x = np.asarray(x0, dtype=float).copy()
        d_cur, wit = _cheap_depth(m, x, seed + 7 * s_i)
        evals += 1
        step = scale / 3.0
        for _ in range(iters):
            moved = False
            for eta in (step, step / 4.0):
                cand = x - eta * wit
                d_new, wit_new = _cheap_depth(m, cand, seed + 7 * s_i)
                evals += 1
                if d_new > d_cur:
                    x, d_cur, wit = cand, d_new, wit_new
                    moved = True
                    break
            if not moved:
                step *= 0.5
                if step < 1e-4 * scale:
                    break
        endpoints.append((d_cur, x))
    endpoints.sort(key=lambda t: -t[0])
    return endpoints, evals


def balanced_median(
    m: DiscreteMeasure,
    starts: int = 16,
    iters: int = 30,
    seed: int = 0,
    tie_tol: float = 1e-9,
) -> MedianResult:
    """A depth maximizer chosen centrally within its plateau.

    Depth super-level sets are convex, so the average of tied maximizers is
    again a maximizer; averaging pulls the anchor away from plateau corners,
    which keeps the surrounding set of minimizing normals spread out (the
    lexicographic tie-break of ``tukey_median`` tends to a corner instead).
    """
    endpoints, evals = _multistart_endpoints(m, starts, iters, seed)
    finals = min(len(endpoints), 6 if m.dim <= 2 else 3)
    scored = []
    for _, x in endpoints[:finals]:
        scored.append((_final_depth(m, x), x))
        evals += 1
    best = max(s for s, _ in scored)
    ties = [x for s, x in scored if s >= best - tie_tol]
    center = np.mean(ties, axis=0)
    dep = _final_depth(m, center)
    evals += 1
    if dep >= best - 1e-12:
        return MedianResult(center, float(dep), evals)
    # numerically off the plateau; fall back to the best endpoint
    s, x = max(scored, key=lambda t: t[0])
    return MedianResult(x, float(s), evals)


def recenter(
    m: DiscreteMeasure, balanced: bool = False, **budget
) -> tuple[DiscreteMeasure, MedianResult]:
    """Translate the measure so its best-found median sits at the origin.

    ``balanced=True`` anchors at a plateau-central maximizer instead of the
    lexicographic tie-break, which witness extraction prefers.
    """
    if balanced:
        budget.pop("mode", None)
        res = balanced_median(m, **budget)
    else:
        res = tukey_median(m, **budget)
    return m.translated(-res.point), res


def min_normal_set(
    m: DiscreteMeasure,
    o,
    tol: float = 1e-6,
    dense_count: int = 4096,
    seed: int = 0,
) -> NormalSet:
    """Sample of the unit normals n whose closed half-space through o
    (outer normal n) carries mass at most depth(o) + tol.

    Combines exact candidate normals (perpendiculars / pair crosses of the
    recentered points, with their one-sided rotational resolutions) and a
    dense deterministic sphere sample; the level is depth(o).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    o = np.asarray(o, dtype=float)
    d = m.dim
    if d <= 3 or m.n <= _EXACT4_MAX_N:
        level = point_depth(m, o, mode="exact").depth
    else:
        level = point_depth(m, o, mode="sampled", sample_count=8192, seed=seed).depth
    p = m.points - o
    norms = np.linalg.norm(p, axis=1)
    keep = norms > DEFAULT_TOL
    phat = p[keep] / norms[keep][:, None]
    cands = [sample_directions(d, dense_count, seed=seed, mode="sphere")]
    if phat.shape[0]:
        if d == 2:
            perp = np.column_stack([-phat[:, 1], phat[:, 0]])
            base = np.vstack([perp, -perp])
            eps = 1e-4
            shift = np.vstack([phat, phat])
            cands.append(base)
            cands.append(base + eps * shift)
            cands.append(base - eps * shift)
        elif d == 3 and phat.shape[0] <= 160:
            ii, jj = np.triu_indices(phat.shape[0], k=1)
            cr = np.cross(phat[ii], phat[jj])
            lens = np.linalg.norm(cr, axis=1)
            cr = cr[lens > 1e-9] / lens[lens > 1e-9][:, None]
            base = np.vstack([cr, -cr])
            eps = 1e-4
            for da, db in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                cands.append(
                    base
                    + eps * da * np.vstack([phat[ii][lens > 1e-9]] * 2)
                    + eps * db * np.vstack([phat[jj][lens > 1e-9]] * 2)
                )
            cands.append(base)
    cand = np.vstack(cands)
    cand /= np.linalg.norm(cand, axis=1)[:, None]
    # closed mass of H(n) = {x : <n, x - o> <= 0} for every candidate normal
    masses = np.empty(cand.shape[0])
    pts = m.points - o
    for lo in range(0, cand.shape[0], 8192):
        blk = cand[lo : lo + 8192]
        masses[lo : lo + 8192] = ((blk @ pts.T) <= DEFAULT_TOL) @ m.weights
    sel = masses <= level + tol
    return NormalSet(cand[sel], float(level))


def _best_subtuple(normals: np.ndarray, d: int):
    """(d+1)-subset of rows maximizing the interior margin of 0 in its hull."""
    k = normals.shape[0]
    idx = np.array(list(itertools.combinations(range(k), d + 1)), dtype=int)
    mats = np.empty((idx.shape[0], d + 1, d + 1))
    mats[:, :d, :] = np.transpose(normals[idx], (0, 2, 1))
    mats[:, d, :] = 1.0
    rhs = np.zeros(d + 1)
    rhs[d] = 1.0
    dets = np.linalg.det(mats)
    ok = np.abs(dets) > 1e-12
    lams = np.full((idx.shape[0], d + 1), -np.inf)
    if ok.any():
        nb = int(ok.sum())
        rhs_b = np.broadcast_to(rhs[:, None], (nb, d + 1, 1)).copy()
        lams[ok] = np.linalg.solve(mats[ok], rhs_b)[:, :, 0]
    margins = lams.min(axis=1)
    j = int(np.argmax(margins))
    return idx[j], float(margins[j])


def _spread_subsample(normals: np.ndarray, target: int) -> np.ndarray:
    """Greedy farthest-point subsample, keeping the angular spread."""
    if normals.shape[0] <= target:
        return normals
    chosen = [0]
    d = normals @ normals[0]
    for _ in range(target - 1):
        j = int(np.argmin(d))
        chosen.append(j)
        d = np.maximum(d, normals @ normals[j])
    return normals[chosen]


def witness_tuple(
    m: DiscreteMeasure,
    o,
    tol: float = 1e-6,
    lambda_min: float = 1e-6,
    seed: int = 0,
):
    """Generating (d+1)-tuple of half-spaces through o witnessing the median.

    Picks d + 1 minimizing normals n_i with the origin strictly inside their
    convex hull, so each half-space {x : <n_i, x - o> <= 0} has mass at most
    depth(o) + tol and the intersection of their complements is {o}.  The
    returned tuple uses the complement orientation (outer normals -n_i),
    which is the small-weight form consumed by the cone machinery:
    its weight equals depth(o) up to discretization.
    """
    o = np.asarray(o, dtype=float)
    d = m.dim
    nset = min_normal_set(m, o, tol=tol, seed=seed)
    if nset.level > 1.0 / d + 1e-9:
        raise WitnessSearchError(
            f"depth at anchor is {nset.level}, above the 1/d regime", 0.0
        )
    if nset.normals.shape[0] < d + 1:
        raise WitnessSearchError(
            f"only {nset.normals.shape[0]} minimizing normals found", 0.0
        )
    cand = _spread_subsample(nset.normals, 28)
    sub, margin = _best_subtuple(cand, d)
    if margin < lambda_min:
        raise WitnessSearchError(
            f"no (d+1)-subset of minimizing normals surrounds the origin "
            f"(best margin {margin:.3g})",
            margin,
        )
    chosen = _center_in_normal_set(cand[sub], nset.normals, m, o, nset.level, tol)
    if hull_interior_margin(chosen) < lambda_min:
        chosen = cand[sub]
    return _cones.GeneratingTuple(-chosen), nset


def _center_in_normal_set(chosen, all_normals, m, o, level, tol, radius=0.35):
    """Replace each chosen normal by the centroid of its angular neighborhood
    inside the minimizing set, keeping it well clear of the set's edges (a
    nearby rotation of the tuple then stays minimizing).  A centered normal
    is kept only if its half-space mass still qualifies."""
    pts = m.points - o
    out = chosen.copy()
    for i, n in enumerate(chosen):
        near = all_normals[all_normals @ n >= np.cos(radius)]
        if near.shape[0] < 2:
            continue
        c = near.mean(axis=0)
        nc = float(np.linalg.norm(c))
        if nc < 1e-9:
            continue
        c /= nc
        mass = float(m.weights[pts @ c <= DEFAULT_TOL].sum())
        if mass <= level + tol:
            out[i] = c
    return out


def witness_masses(m: DiscreteMeasure, o, tup) -> np.ndarray:
    """Masses of the minimizing half-spaces H(n_i) behind a witness tuple."""
    o = np.asarray(o, dtype=float)
    out = []
    for nrm in tup.normals:
        out.append(float(m.weights[(m.points - o) @ (-nrm) <= DEFAULT_TOL].sum()))
    return np.asarray(out)

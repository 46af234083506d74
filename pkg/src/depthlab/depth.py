"""Half-space depth of points and flats, depth landscapes, and deep-line search.

Depth of a query point q is the minimum, over unit directions u, of the mass
of the closed half-space {x : <u, x - q> >= 0}.  For a finite point set the
minimum is attained, and the exact algorithm enumerates candidate normals
orthogonal to spans of (d-1)-subsets of (points - q), resolving boundary ties
by the mass reachable under infinitesimal rotation (a recursive subproblem on
the boundary set).  ``depth_oracle`` is an independent brute-force referee
built on lexicographic sign perturbation; the two implementations share no
code path.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .geometry import (
    DEFAULT_TOL,
    Flat,
    as_vector,
    canonical_direction,
    complement_basis,
    line,
    sample_directions,
    unit,
)
from .measures import DiscreteMeasure, make_measure, project_measure

EXACT_MAX_DIM = 4
EXACT_MAX_N = 5000
ORACLE_MAX_DIM = 3
ORACLE_MAX_N = 14

_CHUNK = 16384


@dataclass(frozen=True, eq=False)
class DepthResult:
    depth: float
    witness: np.ndarray
    mode: str

    def __post_init__(self):
        if not (-1e-12 <= self.depth <= 1 + 1e-12):
            raise ValueError(f"depth {self.depth} outside [0, 1]")


@dataclass(frozen=True, eq=False)
class LineSearchResult:
    direction: np.ndarray
    anchor: np.ndarray
    depth: float
    iterations: int


def line_depth_thresholds(dim: int) -> dict:
    """Depth guarantees for a line in R^dim: the projection (centerpoint)
    bound 1/dim, and the improved bound 1/dim + 1/(3 dim^3) for dim >= 3."""
    return {"rado": 1.0 / dim, "improved": 1.0 / dim + 1.0 / (3.0 * dim**3)}


# ---------------------------------------------------------------------------
# exact closed-half-space minimization through the origin


def _default_unit(k: int) -> np.ndarray:
    e = np.zeros(k)
    e[0] = 1.0
    return e


def _orth_complement_of_vector(u: np.ndarray) -> np.ndarray:
    """Orthonormal basis (k-1, k) of the hyperplane orthogonal to unit u."""
    k = u.size
    q, _ = np.linalg.qr(np.column_stack([u, np.eye(k)]))
    return q[:, 1:k].T


def _halfdepth_1d(p: np.ndarray, w: np.ndarray):
    pos = float(w[p > 0].sum())
    neg = float(w[p < 0].sum())
    return (pos, np.array([1.0])) if pos <= neg else (neg, np.array([-1.0]))


def _halfdepth_2d_sweep(phat: np.ndarray, w: np.ndarray):
    """Exact 2-d minimization by a rotating sweep, O(n log n).

    The closed-semicircle mass as a function of the normal's angle is
    piecewise constant with breakpoints at the point angles +- 90 degrees;
    its minimum is attained strictly between breakpoints, so evaluating at
    the midpoints of consecutive distinct breakpoints is exact and resolves
    all boundary ties automatically (no point lies on a midpoint boundary).
    """
    two_pi = 2.0 * np.pi
    ang = np.mod(np.arctan2(phat[:, 1], phat[:, 0]), two_pi)
    order = np.argsort(ang, kind="stable")
    sa = ang[order]
    cw = np.concatenate([[0.0], np.cumsum(w[order])])
    total = cw[-1]
    bps = np.unique(np.mod(np.concatenate([sa - 0.5 * np.pi, sa + 0.5 * np.pi]), two_pi))
    nxt = np.roll(bps, -1).copy()
    nxt[-1] += two_pi
    mids = np.mod(0.5 * (bps + nxt), two_pi)
    lo = np.mod(mids - 0.5 * np.pi, two_pi)
    hi = np.mod(mids + 0.5 * np.pi, two_pi)
    il = np.searchsorted(sa, lo, side="left")
    ih = np.searchsorted(sa, hi, side="right")
    plain = cw[ih] - cw[il]
    wrapped = (total - cw[il]) + cw[ih]
    masses = np.where(lo <= hi, plain, wrapped)
    j = int(np.argmin(masses))
    phi = mids[j]
    return float(masses[j]), np.array([np.cos(phi), np.sin(phi)])


def _halfdepth_2d(phat: np.ndarray, w: np.ndarray, tol: float):
    """Exact 2-d minimization with explicit tolerance-based tie handling.

    Candidates are the perpendiculars of each point (both signs); the
    boundary set of a candidate is its collinear class (within tol), and a
    reachable tie resolution keeps exactly one side of that line.  Used for
    boundary subproblems inside the recursion, where points cluster by
    construction; the rotating sweep covers the general-position hot path.
    """
    perp = np.column_stack([-phat[:, 1], phat[:, 0]])
    s = perp @ phat.T
    bnd = np.abs(s) <= tol
    cnt = bnd.sum(axis=1)
    strict_pos = (s > tol) @ w
    bnd_mass = bnd @ w
    strict_neg = float(w.sum()) - strict_pos - bnd_mass
    res = np.zeros(phat.shape[0])
    for i in np.nonzero(cnt > 1)[0]:
        msk = bnd[i]
        t = phat[msk] @ phat[i]
        res[i] = min(float(w[msk][t > 0].sum()), float(w[msk][t < 0].sum()))
    vplus = strict_pos + res
    vminus = strict_neg + res
    ip, im = int(np.argmin(vplus)), int(np.argmin(vminus))
    if vplus[ip] <= vminus[im]:
        return float(vplus[ip]), perp[ip]
    return float(vminus[im]), -perp[im]


def _subset_normals(phat: np.ndarray, k: int):
    """Unit normals to spans of independent (k-1)-subsets of the rows."""
    n = phat.shape[0]
    idx = np.array(list(itertools.combinations(range(n), k - 1)), dtype=int)
    if k == 3:
        nrm = np.cross(phat[idx[:, 0]], phat[idx[:, 1]])
    elif k == 4:
        m = np.stack([phat[idx[:, 0]], phat[idx[:, 1]], phat[idx[:, 2]]], axis=1)
        nrm = np.empty((idx.shape[0], 4))
        cols = np.arange(4)
        for j in range(4):
            nrm[:, j] = ((-1.0) ** j) * np.linalg.det(m[:, :, cols != j])
    else:
        raise ValueError(f"unsupported dimension {k}")
    lens = np.linalg.norm(nrm, axis=1)
    keep = lens > 1e-9
    return nrm[keep] / lens[keep][:, None]


def _halfdepth(P: np.ndarray, w: np.ndarray, tol: float):
    """min over unit u of sum w_i [<u, p_i> >= 0], plus an attaining direction.

    P holds nonzero points; handles any dimension by rank reduction, and
    resolves candidate boundary ties by recursion on the boundary set.
    """
    n, k = P.shape
    if n == 0:
        return 0.0, _default_unit(k)
    norms = np.linalg.norm(P, axis=1)
    phat = P / norms[:, None]
    if k == 1:
        return _halfdepth_1d(phat[:, 0], w)
    rank = np.linalg.matrix_rank(phat, tol=1e-10)
    if rank < k:
        _, _, vt = np.linalg.svd(phat, full_matrices=False)
        v = vt[:rank]
        val, usub = _halfdepth(phat @ v.T, w, tol)
        return val, unit(v.T @ usub)
    if k == 2:
        val, u0 = _halfdepth_2d(phat, w, tol)
        return val, _resolved_witness(phat, w, tol, u0, val)

    cand = _subset_normals(phat, k)
    best_val, best_u = np.inf, None
    total_w = float(w.sum())
    uniform = bool(np.all(np.abs(w - w[0]) <= 1e-15))
    wc = np.column_stack([w, np.ones_like(w)])
    # float32 prefilter: dot products certainly clear of the tolerance are
    # classified in single precision (error << band); entries inside the
    # band are recomputed exactly in double precision
    band = 1e-4
    phat32 = phat.astype(np.float32)
    for lo in range(0, cand.shape[0], _CHUNK):
        u_blk = cand[lo : lo + _CHUNK]
        s32 = u_blk.astype(np.float32) @ phat32.T
        sure_pos = s32 > band
        sure_neg = s32 < -band
        unc_r, unc_c = np.nonzero(np.abs(s32) <= band)
        if unc_r.size:
            s_exact = np.einsum("ij,ij->i", u_blk[unc_r], phat[unc_c])
            upos = s_exact > tol
            uneg = s_exact < -tol
        else:
            upos = uneg = np.zeros(0, dtype=bool)
        if uniform:
            pos_cnt = sure_pos.sum(axis=1).astype(float)
            neg_cnt = sure_neg.sum(axis=1).astype(float)
            if unc_r.size:
                np.add.at(pos_cnt, unc_r[upos], 1.0)
                np.add.at(neg_cnt, unc_r[uneg], 1.0)
            pos_mass = pos_cnt * w[0]
            neg_mass = neg_cnt * w[0]
            bnd_cnt = n - pos_cnt - neg_cnt
        else:
            pos_res = sure_pos @ wc
            neg_res = sure_neg @ wc
            if unc_r.size:
                np.add.at(pos_res[:, 0], unc_r[upos], w[unc_c[upos]])
                np.add.at(pos_res[:, 1], unc_r[upos], 1.0)
                np.add.at(neg_res[:, 0], unc_r[uneg], w[unc_c[uneg]])
                np.add.at(neg_res[:, 1], unc_r[uneg], 1.0)
            pos_mass, neg_mass = pos_res[:, 0], neg_res[:, 0]
            bnd_cnt = n - pos_res[:, 1] - neg_res[:, 1]
        generic = bnd_cnt == (k - 1)
        # generic rows: the k-1 independent boundary points admit a strictly
        # separating rotation, so the tie resolution contributes nothing
        vals = np.where(generic, np.minimum(pos_mass, neg_mass), np.inf)
        j = int(np.argmin(vals))
        if vals[j] < best_val:
            best_val = float(vals[j])
            best_u = u_blk[j] if pos_mass[j] <= neg_mass[j] else -u_blk[j]
        for j in np.nonzero(~generic)[0]:
            u = u_blk[j]
            b = np.abs(phat @ u) <= tol
            comp = _orth_complement_of_vector(u)
            subval, _ = _halfdepth(phat[b] @ comp.T, w[b], tol)
            for sgn, base in ((1.0, float(pos_mass[j])), (-1.0, float(neg_mass[j]))):
                if base + subval < best_val:
                    best_val, best_u = base + subval, sgn * u
    if best_u is None:
        raise RuntimeError("no candidate normals; degenerate input")
    return best_val, _resolved_witness(phat, w, tol, best_u, best_val)


def _resolved_witness(phat, w, tol, u, target):
    """Concrete unit direction near u attaining the resolved value ``target``."""
    s = phat @ u
    b = np.abs(s) <= tol
    if not b.any():
        return unit(u)
    comp = _orth_complement_of_vector(unit(u))
    _, usub = _halfdepth(phat[b] @ comp.T, w[b], tol)
    w_emb = comp.T @ usub
    gaps = np.abs(s[~b])
    eps = 0.49 * float(gaps.min()) if gaps.size else 0.5
    for _ in range(10):
        cand = unit(u + eps * w_emb)
        val = float(w[phat @ cand >= -tol].sum())
        if abs(val - target) <= 1e-9:
            return cand
        eps /= 16.0
    # unrealizable beyond general position; the caller detects the mismatch
    # and degrades to a certified upper bound
    return unit(u)


def _split_query(m: DiscreteMeasure, q: np.ndarray, tol: float):
    p = m.points - q
    norms = np.linalg.norm(p, axis=1)
    coincident = norms <= tol
    w0 = float(m.weights[coincident].sum())
    return p[~coincident], m.weights[~coincident], w0


def exact_depth_value_2d(m: DiscreteMeasure, q, tol: float = DEFAULT_TOL):
    """Exact planar depth value with an unresolved witness candidate.

    Same value as ``point_depth(..., mode="exact")`` but skips the witness
    resolution, for hot loops (median ascent, direction scans) that only
    need the number and a descent direction.
    """
    q = np.asarray(q, dtype=float)
    P, w, w0 = _split_query(m, q, tol)
    if P.shape[0] == 0:
        return 1.0, _default_unit(2)
    norms = np.linalg.norm(P, axis=1)
    val, u = _halfdepth_2d_sweep(P / norms[:, None], w)
    return w0 + val, u


def point_depth(
    m: DiscreteMeasure,
    q,
    mode: str = "exact",
    sample_count: int = 512,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> DepthResult:
    """Half-space depth of a point.

    exact    candidate-normal enumeration with tie resolution; requires
             dim <= 4 and n <= 5000 (d=4 cost grows as n^3; see
             ``certified_depth_floor`` for a fast conservative bound).
    sampled  upper bound over ``sample_count`` seeded sphere directions; the
             direction stream is prefix-stable in the count, so a larger
             sample with the same seed can only lower the bound.
    """
    q = as_vector(q)
    if q.size != m.dim:
        raise ValueError(f"query dim {q.size} != measure dim {m.dim}")
    if mode == "exact":
        if m.dim > EXACT_MAX_DIM or m.n > EXACT_MAX_N:
            raise ValueError(
                f"exact mode limited to dim <= {EXACT_MAX_DIM}, n <= {EXACT_MAX_N}"
            )
        P, w, w0 = _split_query(m, q, tol)
        if P.shape[0] == 0:
            return DepthResult(1.0, _default_unit(m.dim), "exact")
        phat = P / np.linalg.norm(P, axis=1)[:, None]
        if m.dim == 2:
            # fast path; fall back to the tolerance-based recursion when the
            # sweep witness disagrees (near-degenerate angular gaps)
            val, u = _halfdepth_2d_sweep(phat, w)
            check = w0 + float(w[phat @ u >= -tol].sum())
            if abs(check - (w0 + val)) <= 1e-9:
                return DepthResult(w0 + val, u, "exact")
        val, u = _halfdepth(P, w, tol)
        depth = w0 + val
        check = w0 + float(w[phat @ u >= -tol].sum())
        if abs(check - depth) > 1e-9:
            # beyond general position the resolved value may be unattainable;
            # report the attained mass, which is a certified upper bound
            return DepthResult(check, u, "exact-upper-bound")
        return DepthResult(depth, u, "exact")
    if mode == "sampled":
        u = sample_directions(m.dim, sample_count, seed=seed, mode="sphere")
        p = m.points - q
        norms = np.linalg.norm(p, axis=1)
        norms[norms == 0] = 1.0
        s = u @ (p / norms[:, None]).T
        masses = (s >= -tol) @ m.weights
        j = int(np.argmin(masses))
        return DepthResult(float(masses[j]), u[j], "sampled")
    raise ValueError(f"unknown mode {mode!r}")


def certified_depth_floor(m: DiscreteMeasure, q, gamma: float = 0.1) -> float:
    """Certified lower bound on the exact depth of q.

    Uses a deterministic angle-grid net with covering radius <= gamma on the
    unit sphere: for every direction u there is a net point u0 within angle
    gamma, and {x : <u, x - q> >= 0} contains {x : <u0, x - q> >= gamma |x - q|}.
    Converges to the exact depth as gamma -> 0.  Supported for dim in {2,3,4}.
    """
    q = as_vector(q)
    d = m.dim
    if d == 2:
        step = 2.0 * gamma
        ang = np.arange(0.0, 2.0 * np.pi + step, step)
        net = np.column_stack([np.cos(ang), np.sin(ang)])
    elif d == 3:
        step = gamma
        a = np.arange(0.0, np.pi + step, step)
        b = np.arange(0.0, 2.0 * np.pi + step, step)
        aa, bb = np.meshgrid(a, b, indexing="ij")
        net = np.column_stack(
            [
                np.cos(aa).ravel(),
                (np.sin(aa) * np.cos(bb)).ravel(),
                (np.sin(aa) * np.sin(bb)).ravel(),
            ]
        )
    elif d == 4:
        step = 2.0 * gamma / 3.0
        a = np.arange(0.0, np.pi + step, step)
        c = np.arange(0.0, 2.0 * np.pi + step, step)
        aa, bb, cc = np.meshgrid(a, a, c, indexing="ij")
        sa, sb = np.sin(aa), np.sin(bb)
        net = np.column_stack(
            [
                np.cos(aa).ravel(),
                (sa * np.cos(bb)).ravel(),
                (sa * sb * np.cos(cc)).ravel(),
                (sa * sb * np.sin(cc)).ravel(),
            ]
        )
    else:
        raise ValueError("certified floor supported for dim in {2, 3, 4}")
    p = m.points - q
    norms = np.linalg.norm(p, axis=1)
    # float32 with a safety inflation of the margin keeps the bound valid:
    # every counted point certainly satisfies <u0, p> >= sin(gamma) |p|
    margin32 = (np.sin(gamma) * norms + 1e-5 * (norms + 1.0)).astype(np.float32)
    p32 = p.astype(np.float32)
    best = np.inf
    for lo in range(0, net.shape[0], _CHUNK):
        s = net[lo : lo + _CHUNK].astype(np.float32) @ p32.T
        vals = (s >= margin32) @ m.weights
        best = min(best, float(vals.min()))
    return best


# ---------------------------------------------------------------------------
# independent brute-force oracle


def depth_oracle(m: DiscreteMeasure, q, tol: float = DEFAULT_TOL) -> DepthResult:
    """Exhaustive ground-truth depth for tiny instances (n <= 14, dim <= 3).

    Enumerates hyperplane normals through q and <= d-1 points, composing each
    with one or two lexicographic perturbation levels so that every drop/keep
    pattern reachable by infinitesimal rotation is evaluated.  Exact on
    integer-coordinate inputs; shares no code with ``point_depth``.
    """
    q = as_vector(q)
    if m.dim > ORACLE_MAX_DIM or m.n > ORACLE_MAX_N:
        raise ValueError(f"oracle limited to dim <= {ORACLE_MAX_DIM}, n <= {ORACLE_MAX_N}")
    P, w, w0 = _split_query(m, q, tol)
    n, d = P.shape
    if n == 0:
        return DepthResult(1.0, _default_unit(m.dim), "oracle")
    scale = np.linalg.norm(P, axis=1)

    if d == 1:
        pos = float(w[P[:, 0] > 0].sum())
        neg = float(w[P[:, 0] < 0].sum())
        u = np.array([1.0]) if pos <= neg else np.array([-1.0])
        return DepthResult(w0 + min(pos, neg), u, "oracle")

    basis = np.eye(d)
    if d == 2:
        perp = np.column_stack([-P[:, 1], P[:, 0]])
        u0s = np.vstack([perp, -perp, basis, -basis])
        wfam = np.vstack([P, -P, basis, -basis])
        a = u0s @ P.T
        b = wfam @ P.T
        za = 1e-9 * np.linalg.norm(u0s, axis=1)[:, None] * scale[None, :]
        zb = 1e-9 * np.linalg.norm(wfam, axis=1)[:, None] * scale[None, :]
        a_eff = np.where(np.abs(a) > za, a, 0.0)
        b_eff = np.where(np.abs(b) > zb, b, 0.0)
        s = np.where(a_eff[:, None, :] != 0.0, a_eff[:, None, :], b_eff[None, :, :])
        vals = (s >= 0) @ w
        i0, iw = np.unravel_index(int(np.argmin(vals)), vals.shape)
        best = float(vals[i0, iw])
        witness = _oracle_witness(P, w, best, u0s[i0], wfam[iw], None, tol)
        return DepthResult(w0 + best, witness, "oracle")

    # d == 3
    aug = np.vstack([P, basis])
    pairs = list(itertools.combinations(range(aug.shape[0]), 2))
    crosses = np.cross(aug[[i for i, _ in pairs]], aug[[j for _, j in pairs]])
    lens = np.linalg.norm(crosses, axis=1)
    crosses = crosses[lens > 1e-12 * max(1.0, float(scale.max())) ** 2]
    u0s = np.vstack([crosses, -crosses])
    vfam = np.vstack([P, -P, basis, -basis])
    cmat = vfam @ P.T
    zc = 1e-9 * np.linalg.norm(vfam, axis=1)[:, None] * scale[None, :]
    c_eff = np.where(np.abs(cmat) > zc, cmat, 0.0)
    best, best_combo = np.inf, None
    for u0 in u0s:
        a = u0 @ P.T
        za = 1e-9 * np.linalg.norm(u0) * scale
        a_eff = np.where(np.abs(a) > za, a, 0.0)
        wf = np.cross(u0, aug)
        wf = np.vstack([wf, -wf])
        wl = np.linalg.norm(wf, axis=1)
        wf = wf[wl > 1e-12 * max(1.0, float(np.linalg.norm(u0))) * max(1.0, float(scale.max()))]
        if wf.shape[0] == 0:
            continue
        bmat = wf @ P.T
        zb = 1e-9 * np.linalg.norm(wf, axis=1)[:, None] * scale[None, :]
        b_eff = np.where(np.abs(bmat) > zb, bmat, 0.0)
        s = np.where(
            a_eff[None, None, :] != 0.0,
            a_eff[None, None, :],
            np.where(b_eff[:, None, :] != 0.0, b_eff[:, None, :], c_eff[None, :, :]),
        )
        vals = (s >= 0) @ w
        jw, jv = np.unravel_index(int(np.argmin(vals)), vals.shape)
        if float(vals[jw, jv]) < best:
            best = float(vals[jw, jv])
            best_combo = (u0.copy(), wf[jw].copy(), vfam[jv].copy())
    u0, wv, vv = best_combo
    witness = _oracle_witness(P, w, best, u0, wv, vv, tol)
    return DepthResult(w0 + best, witness, "oracle")


def _oracle_witness(P, w, target, u0, wvec, vvec, tol):
    """Realize a lexicographic perturbation as a concrete unit direction.

    ``target`` is the mass over the non-coincident points only.
    """
    phat = P / np.linalg.norm(P, axis=1)[:, None]
    base = u0 / np.linalg.norm(u0)
    wn = wvec / np.linalg.norm(wvec)
    vn = vvec / np.linalg.norm(vvec) if vvec is not None else None
    e1 = 1e-4
    for _ in range(12):
        u = base + e1 * wn
        if vn is not None:
            u = u + (e1 * e1) * vn
        u = unit(u)
        val = float(w[phat @ u >= -tol].sum())
        if abs(val - target) <= 1e-12:
            return u
        e1 /= 8.0
    return base


# ---------------------------------------------------------------------------
# flats, profiles, line search


def flat_depth(m: DiscreteMeasure, f: Flat, mode: str | None = None, **kw) -> DepthResult:
    """Depth of a k-flat: project the measure along it and take the depth of
    the projected anchor point (the image of the flat)."""
    if f.k >= m.dim:
        raise ValueError("flat dimension must be below the ambient dimension")
    proj = project_measure(m, f)
    anchor = complement_basis(f) @ f.base
    if mode is None:
        mode = "exact" if (proj.dim <= EXACT_MAX_DIM and proj.n <= EXACT_MAX_N) else "sampled"
    return point_depth(proj, anchor, mode=mode, **kw)


def direction_profile(m: DiscreteMeasure, direction, budget: dict | None = None):
    """Best median depth in the projection of m along a line direction.

    Returns (a, median_point), the median being expressed in the projected
    coordinates.  ``budget`` is forwarded to the median search.
    """
    if m.dim < 2:
        raise ValueError("need ambient dimension >= 2")
    from . import median as _median

    budget = dict(budget or {})
    fl = line(direction)
    proj = project_measure(m, fl)
    res = _median.tukey_median(proj, **budget)
    return res.depth, res.point


def _subsampled(m: DiscreteMeasure, count: int, seed: int) -> DiscreteMeasure:
    if m.n <= count:
        return m
    rng = np.random.default_rng(seed)
    idx = rng.choice(m.n, size=count, replace=False, p=m.weights)
    return make_measure(m.points[idx])


def _cap_samples(center: np.ndarray, angle: float, count: int, seed: int) -> np.ndarray:
    """Directions within the given angle of ``center``, deterministic in seed."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((count, center.size))
    g -= np.outer(g @ center, center)
    lens = np.linalg.norm(g, axis=1)
    lens[lens == 0] = 1.0
    t = angle * rng.random(count)
    out = np.cos(t)[:, None] * center + np.sin(t)[:, None] * (g / lens[:, None])
    return out / np.linalg.norm(out, axis=1)[:, None]


def deep_line_search(
    m: DiscreteMeasure,
    grid_count: int = 512,
    refine_iters: int = 3,
    seed: int = 0,
    scan_subsample: int = 160,
    top_k: int = 6,
) -> LineSearchResult:
    """Search for a deep line: scan a projective direction grid (on a
    subsampled copy of the measure), re-rank the best directions on the full
    measure, then refine by shrinking-cap sampling.

    Heuristic maximizer: the depth guarantee promises existence, not
    constructibility, so the result is best-found; its depth is certified by
    a final exact median evaluation of the chosen projection.
    """
    if m.dim < 3:
        raise ValueError("line search needs ambient dimension >= 3")
    grid = np.array([canonical_direction(u) for u in sample_directions(m.dim, grid_count, mode="grid")])
    scan_m = _subsampled(m, scan_subsample, seed)
    cheap = {"starts": 4, "iters": 4, "seed": seed}
    mid = {"starts": 10, "iters": 16, "seed": seed}
    evals = 0

    scores = np.empty(grid.shape[0])
    for i, u in enumerate(grid):
        scores[i], _ = direction_profile(scan_m, u, cheap)
        evals += 1
    order = np.argsort(-scores)[: max(1, top_k)]

    best_a, best_u = -1.0, None
    for i in order:
        a, _ = direction_profile(m, grid[i], mid)
        evals += 1
        if a > best_a:
            best_a, best_u = a, grid[i]

    cap = 2.0 * np.sqrt(4.0 * np.pi / max(grid_count, 1))
    for it in range(refine_iters):
        for u in _cap_samples(best_u, cap, 24, seed + 1000 + it):
            u = canonical_direction(u)
            a, _ = direction_profile(m, u, mid)
            evals += 1
            if a > best_a:
                best_a, best_u = a, u
        cap *= 0.5

    heavy = {"starts": 24, "iters": 40, "seed": seed}
    a, med = direction_profile(m, best_u, heavy)
    evals += 1
    if a < best_a:  # deterministic re-derivation of the mid-budget median
        a, med = direction_profile(m, best_u, mid)
    anchor = complement_basis(line(best_u)).T @ med
    return LineSearchResult(best_u, anchor, float(a), evals)

"""Generating half-space tuples, their simplicial cones, mass bounds, matching.

A generating tuple is d + 1 closed half-spaces through the origin whose
intersection is exactly {0}; equivalently the origin lies strictly inside the
convex hull of their outer normals.  Each tuple induces d + 1 simplicial
cones (drop one half-space, intersect the rest).  Small-weight tuples have
cone masses pinned near 1/(d+1), and the cones of two small-weight tuples
match up one-to-one by shared mass; families of tuples can therefore be
ordered consistently against a reference.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .geometry import DEFAULT_TOL, HalfSpace, SimplicialCone, hull_interior_margin
from .measures import DiscreteMeasure, cone_mass, halfspace_mass

GENERATING_MARGIN = 1e-9


class MatchingError(RuntimeError):
    """The cone-overlap bipartite graph is not a unique perfect matching."""


def epsilon_bmes_max(d: int) -> float:
    """Largest admissible epsilon for the cone-mass bounds."""
    return 1.0 / ((d + 1) * (2 * d + 1))


def epsilon_match_max(d: int) -> float:
    """Largest admissible epsilon for the cone-matching bound."""
    return 1.0 / ((d + 1) * (3 * d + 2))


def family_level_cap(d: int) -> float:
    """Upper end of the admissible weight range for ordered families."""
    return 1.0 / (d + 1) + 1.0 / (3.0 * (d + 1) ** 3)


def family_overlap_floor(d: int) -> float:
    """Pairwise matched-cone mass floor for ordered families."""
    return 1.0 / (d + 1) - (3.0 * d + 2.0) / (3.0 * (d + 1) ** 3)


@dataclass(frozen=True, eq=False)
class GeneratingTuple:
    """Ordered d+1 origin half-spaces with trivial intersection.

    ``normals`` holds the outer normals as rows, shape (d+1, d).
    """

    normals: np.ndarray
    margin: float = field(init=False)

    def __post_init__(self):
        nrm = np.asarray(self.normals, dtype=float)
        if nrm.ndim != 2 or nrm.shape[0] != nrm.shape[1] + 1:
            raise ValueError(f"need (d+1) x d normals, got {nrm.shape}")
        lens = np.linalg.norm(nrm, axis=1)
        if np.any(lens == 0):
            raise ValueError("zero normal")
        nrm = nrm / lens[:, None]
        margin = hull_interior_margin(nrm)
        if margin < GENERATING_MARGIN:
            raise ValueError(
                f"not generating: hull interior margin {margin:.3g} < {GENERATING_MARGIN}"
            )
        object.__setattr__(self, "normals", nrm)
        object.__setattr__(self, "margin", float(margin))
        self.normals.setflags(write=False)

    @property
    def d(self) -> int:
        return self.normals.shape[1]

    @property
    def halves(self) -> list[HalfSpace]:
        return [HalfSpace(n, 0.0) for n in self.normals]

    def reordered(self, perm) -> "GeneratingTuple":
        return GeneratingTuple(self.normals[np.asarray(perm, dtype=int)])

    def rotated(self, r: np.ndarray) -> "GeneratingTuple":
        return GeneratingTuple(self.normals @ np.asarray(r, dtype=float).T)


@dataclass(frozen=True, eq=False)
class ConeTuple:
    cones: list[SimplicialCone]


@dataclass(frozen=True, eq=False)
class MatchReport:
    permutation: np.ndarray  # sigma: cones_A[i] pairs with cones_B[sigma[i]]
    intersection_masses: np.ndarray  # (d+1, d+1)
    epsilon_used: float


@dataclass(frozen=True, eq=False)
class OrderedFamily:
    tuples: list[GeneratingTuple]
    level: float
    reference_index: int = 0


def is_generating(halves_or_normals, tol: float = GENERATING_MARGIN):
    """Whether d+1 origin half-spaces intersect only at the origin.

    Accepts HalfSpace lists (offsets must be 0) or a normal matrix; returns
    (flag, margin) where the margin quantifies how strictly the origin sits
    inside the hull of the outer normals.
    """
    if isinstance(halves_or_normals, np.ndarray):
        normals = halves_or_normals
    else:
        halves = list(halves_or_normals)
        for h in halves:
            if abs(h.offset) > 1e-12:
                raise ValueError("generating tuples require origin-anchored half-spaces")
        normals = np.array([h.normal for h in halves])
    d = normals.shape[1]
    if normals.shape[0] != d + 1:
        raise ValueError(f"need d+1 half-spaces, got {normals.shape[0]} in dim {d}")
    lens = np.linalg.norm(normals, axis=1)
    normals = normals / lens[:, None]
    margin = hull_interior_margin(normals)
    return margin >= tol, float(margin)


def cones_of(t: GeneratingTuple) -> ConeTuple:
    """The d+1 simplicial cones of a tuple: cone i drops half-space i."""
    d = t.d
    cones = []
    for i in range(d + 1):
        rows = np.delete(t.normals, i, axis=0)
        if abs(np.linalg.det(rows)) <= 1e-10:
            raise ValueError(f"cone {i}: remaining normals are linearly dependent")
        cones.append(SimplicialCone(np.zeros(d), rows))
    return ConeTuple(cones)


def tuple_weight(m: DiscreteMeasure, t: GeneratingTuple, tol: float = DEFAULT_TOL) -> float:
    """1 minus the smallest half-space mass of the tuple."""
    masses = [halfspace_mass(m, h, tol) for h in t.halves]
    return 1.0 - min(masses)


@dataclass(frozen=True, eq=False)
class BmesReport:
    cone_masses: np.ndarray
    epsilon: float
    sum_bound: float  # required strict lower bound on sum of cone masses
    lower: float  # required strict lower bound per cone
    upper: float  # required strict upper bound per cone
    sum_slack: float
    lower_slacks: np.ndarray
    upper_slacks: np.ndarray

    @property
    def sum_ok(self) -> bool:
        return self.sum_slack > 0

    @property
    def bounds_ok(self) -> bool:
        return bool(np.all(self.lower_slacks > 0) and np.all(self.upper_slacks > 0))

    @property
    def all_ok(self) -> bool:
        return self.sum_ok and self.bounds_ok


def bmes_report(m: DiscreteMeasure, t: GeneratingTuple, eps: float) -> BmesReport:
    """Evaluate the cone-mass bounds for a small-weight tuple.

    Requires eps in (0, 1/((d+1)(2d+1))] and tuple weight < 1/(d+1) + eps;
    then the cone masses must satisfy sum > 1 - (d+1) eps and each must lie
    in (1/(d+1) - (2d+1) eps, 1/(d+1) + eps).
    """
    d = t.d
    if not (0 < eps <= epsilon_bmes_max(d)):
        raise ValueError(f"eps must lie in (0, {epsilon_bmes_max(d)!r}], got {eps}")
    w = tuple_weight(m, t)
    if not w < 1.0 / (d + 1) + eps:
        raise ValueError(f"tuple weight {w} is not below 1/(d+1) + eps = {1.0 / (d + 1) + eps}")
    masses = np.array([cone_mass(m, b) for b in cones_of(t).cones])
    sum_bound = 1.0 - (d + 1) * eps
    lower = 1.0 / (d + 1) - (2 * d + 1) * eps
    upper = 1.0 / (d + 1) + eps
    return BmesReport(
        cone_masses=masses,
        epsilon=eps,
        sum_bound=sum_bound,
        lower=lower,
        upper=upper,
        sum_slack=float(masses.sum() - sum_bound),
        lower_slacks=masses - lower,
        upper_slacks=upper - masses,
    )


def _pair_masses(m: DiscreteMeasure, A: GeneratingTuple, B: GeneratingTuple, tol: float) -> np.ndarray:
    """Masses of pairwise cone intersections, via joint membership masks."""
    d = A.d
    ca, cb = cones_of(A).cones, cones_of(B).cones
    in_a = np.stack([(m.points @ c.normals.T <= tol).all(axis=1) for c in ca])
    in_b = np.stack([(m.points @ c.normals.T <= tol).all(axis=1) for c in cb])
    return (in_a * m.weights) @ in_b.T


def _perfect_matching(adj: np.ndarray):
    """Maximum bipartite matching by augmenting paths; returns column match
    per row or None if no perfect matching exists."""
    n = adj.shape[0]
    match_col = [-1] * n  # column -> row

    def try_row(r, visited):
        for c in range(n):
            if adj[r, c] and not visited[c]:
                visited[c] = True
                if match_col[c] == -1 or try_row(match_col[c], visited):
                    match_col[c] = r
                    return True
        return False

    for r in range(n):
        if not try_row(r, [False] * n):
            return None
    sigma = np.empty(n, dtype=int)
    for c, r in enumerate(match_col):
        sigma[r] = c
    return sigma


def match_tuples(
    m: DiscreteMeasure,
    A: GeneratingTuple,
    B: GeneratingTuple,
    eps: float | None = None,
    delta_edge: float = 1e-6,
    tol: float = DEFAULT_TOL,
) -> MatchReport:
    """Match the cones of two small-weight tuples by shared mass.

    Builds the bipartite graph with an edge where the intersection mass
    exceeds ``delta_edge``; the graph must be a unique perfect matching and
    every matched mass must exceed 1/(d+1) - (3d+2) eps.  Violations raise
    MatchingError rather than returning silently.
    """
    d = A.d
    if B.d != d:
        raise ValueError("tuples live in different dimensions")
    if eps is None:
        eps = epsilon_match_max(d)
    if not (0 < eps <= epsilon_match_max(d)):
        raise ValueError(f"eps must lie in (0, {epsilon_match_max(d)!r}], got {eps}")
    cap = 1.0 / (d + 1) + eps
    for name, t in (("first", A), ("second", B)):
        w = tuple_weight(m, t, tol)
        if not w < cap:
            raise ValueError(f"{name} tuple has weight {w}, not below 1/(d+1) + eps = {cap}")
    masses = _pair_masses(m, A, B, tol)
    adj = masses > delta_edge
    sigma = _perfect_matching(adj)
    if sigma is None:
        raise MatchingError(f"no perfect matching; intersection masses:\n{masses}")
    floor = 1.0 / (d + 1) - (3 * d + 2) * eps
    off = masses.copy()
    off[np.arange(d + 1), sigma] = 0.0
    if np.any(off > delta_edge):
        raise MatchingError(
            f"matching is not unique: off-matching mass up to {off.max():.3g} "
            f"exceeds the edge threshold {delta_edge}"
        )
    matched = masses[np.arange(d + 1), sigma]
    if np.any(matched <= floor):
        raise MatchingError(
            f"matched masses {matched} do not all exceed the floor {floor}"
        )
    return MatchReport(sigma, masses, float(eps))


def canonical_labeling(t: GeneratingTuple) -> GeneratingTuple:
    """Reorder a tuple so its normals are sorted lexicographically."""
    order = np.lexsort(t.normals.T[::-1])
    return t.reordered(order)


def build_ordered_family(
    m: DiscreteMeasure,
    a: float,
    tuples: list[GeneratingTuple],
    tol: float = DEFAULT_TOL,
) -> OrderedFamily:
    """Order a list of generating tuples consistently against a reference.

    Requires 1/(d+1) < a < 1/(d+1) + 1/(3(d+1)^3) and every tuple weight at
    most a.  The first tuple, canonically labeled, fixes the reference order;
    every other tuple is reordered by its cone matching to the reference, and
    the pairwise matched-mass floor is verified across the whole family.
    """
    if not tuples:
        raise ValueError("need at least one tuple")
    d = tuples[0].d
    cap = family_level_cap(d)
    if not (1.0 / (d + 1) < a < cap):
        raise ValueError(f"a must lie in (1/(d+1), {cap!r}), got {a}")
    for i, t in enumerate(tuples):
        w = tuple_weight(m, t, tol)
        if w > a + 1e-12:
            raise ValueError(f"tuple {i} has weight {w} > a = {a}")
    eps = 1.0 / (3.0 * (d + 1) ** 3)  # gives the family floor via (3d+2) eps
    ref = canonical_labeling(tuples[0])
    ordered = [ref]
    for t in tuples[1:]:
        rep = match_tuples(m, ref, t, eps=eps, tol=tol)
        # reordering by sigma aligns cone i of the member with cone i of ref:
        # cone i of t.reordered(p) is cone p[i] of t
        ordered.append(t.reordered(rep.permutation))
    floor = family_overlap_floor(d)
    for i, j in itertools.combinations(range(len(ordered)), 2):
        masses = _pair_masses(m, ordered[i], ordered[j], tol)
        diag = np.diag(masses)
        if np.any(diag <= floor):
            raise MatchingError(
                f"family pair ({i}, {j}) violates the overlap floor {floor}: {diag}"
            )
    return OrderedFamily(ordered, float(a), 0)


def family_member_order(
    m: DiscreteMeasure,
    family: OrderedFamily,
    t: GeneratingTuple,
    tol: float = DEFAULT_TOL,
) -> np.ndarray | None:
    """Permutation aligning a candidate tuple with the family's reference
    order (cone i of ``t.reordered(p)`` overlaps reference cone i), or None
    when the matching fails."""
    ref = family.tuples[family.reference_index]
    try:
        rep = match_tuples(m, ref, t, eps=1.0 / (3.0 * (t.d + 1) ** 3), tol=tol)
    except (MatchingError, ValueError):
        return None
    return np.asarray(rep.permutation, dtype=int)

import numpy as np
import pytest

from depthlab.geometry import cone_contains, cone_contains_many, hull_interior_margin
from depthlab.measures import MeasureSpec, cone_mass, generate_measure, make_measure
from depthlab.median import recenter, witness_tuple
from depthlab.cones import (
    GeneratingTuple,
    MatchingError,
    bmes_report,
    build_ordered_family,
    canonical_labeling,
    cones_of,
    epsilon_bmes_max,
    epsilon_match_max,
    is_generating,
    match_tuples,
    tuple_weight,
)
from depthlab.suites import _small_rotation


def normals_at(degrees):
    ang = np.deg2rad(degrees)
    return np.column_stack([np.cos(ang), np.sin(ang)])


@pytest.fixture
def tri_tuple():
    return GeneratingTuple(normals_at([90, 210, 330]))


@pytest.fixture
def mixture_with_witness():
    spec = MeasureSpec("simplex_mixture", 2, 240, {"sigma": 0.02}, 5)
    m = generate_measure(spec)
    mc, _ = recenter(m, balanced=True, starts=8, iters=20, seed=5)
    tup, _ = witness_tuple(mc, np.zeros(2), seed=5)
    return mc, tup


def test_is_generating_examples():
    ok, margin = is_generating(normals_at([90, 210, 330]))
    assert ok and margin == pytest.approx(1 / 3, abs=1e-12)
    ok, _ = is_generating(np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]]))
    assert not ok  # intersection is the ray {x=0, y<=0}
    ok, _ = is_generating(normals_at([10, 40, 80]))
    assert not ok  # all normals in an open half-plane


def test_is_generating_rejects_affine():
    from depthlab.geometry import HalfSpace

    with pytest.raises(ValueError):
        is_generating([HalfSpace([1, 0], 1.0), HalfSpace([-1, 0], 0.0), HalfSpace([0, 1], 0.0)])


def test_generating_tuple_validation():
    with pytest.raises(ValueError, match="not generating"):
        GeneratingTuple(normals_at([10, 40, 80]))


def test_cones_of_triangle(tri_tuple):
    cones = cones_of(tri_tuple).cones
    # three 60-degree cones with pairwise disjoint interiors; cone i points
    # along +n_i for the symmetric tuple, and never contains -n_i
    for i, c in enumerate(cones):
        assert cone_contains(c, tri_tuple.normals[i] * 2.0)
        assert not cone_contains(c, -tri_tuple.normals[i] * 2.0)
    rng = np.random.default_rng(0)
    pts = rng.standard_normal((2000, 2))
    inside = np.stack([
        np.all(pts @ c.normals.T < -1e-9, axis=1) for c in cones
    ])
    assert inside.sum(axis=0).max() <= 1
    # covered exactly d times: a point is in some cone iff it sits in >= d
    # of the d+1 half-spaces
    in_halves = (pts @ tri_tuple.normals.T <= 1e-9).sum(axis=1)
    in_cone = np.zeros(pts.shape[0], dtype=bool)
    for c in cones:
        in_cone |= cone_contains_many(c, pts)
    assert np.array_equal(in_cone, in_halves >= 2)


def test_cones_of_bijective(tri_tuple):
    other = GeneratingTuple(normals_at([95, 210, 330]))
    ca = np.stack([c.normals for c in cones_of(tri_tuple).cones])
    cb = np.stack([c.normals for c in cones_of(other).cones])
    assert not np.allclose(ca, cb)


def test_tuple_weight_examples(triangle, tri_tuple):
    # the triangle witness tuple: each half-space has mass 2/3
    tup, _ = witness_tuple(triangle, [0, 0])
    assert tuple_weight(triangle, tup) == pytest.approx(1 / 3, abs=1e-9)
    m_all = make_measure([[0.0, 0.0]])  # on every boundary: all masses are 1
    t = GeneratingTuple(normals_at([90, 210, 330]))
    assert tuple_weight(m_all, t) == pytest.approx(0.0, abs=1e-12)
    rng = np.random.default_rng(1)
    m = make_measure(rng.standard_normal((50, 2)))
    assert 0.0 <= tuple_weight(m, t) <= 1.0


def test_bmes_report_triangle(triangle):
    tup, _ = witness_tuple(triangle, [0, 0])
    eps = 1 / 15
    rep = bmes_report(triangle, tup, eps)
    assert rep.all_ok
    assert rep.cone_masses.sum() == pytest.approx(1.0, abs=1e-9)
    assert rep.sum_bound == pytest.approx(1 - 3 * eps)
    assert rep.lower == pytest.approx(1 / 3 - 5 * eps)
    assert rep.upper == pytest.approx(1 / 3 + eps)


def test_bmes_epsilon_precondition(triangle):
    tup, _ = witness_tuple(triangle, [0, 0])
    with pytest.raises(ValueError, match="eps"):
        bmes_report(triangle, tup, 0.2)  # above 1/15 for d=2


def test_bmes_weight_precondition(tri_tuple):
    # a measure concentrated in one cone makes the weight large
    m = make_measure([[0.0, -3.0], [0.1, -3.0], [-0.1, -2.5]])
    with pytest.raises(ValueError, match="weight"):
        bmes_report(m, tri_tuple, epsilon_bmes_max(2))


def test_match_identity(mixture_with_witness):
    mc, tup = mixture_with_witness
    rep = match_tuples(mc, tup, tup, eps=epsilon_match_max(2))
    assert np.array_equal(rep.permutation, np.arange(3))
    diag = rep.intersection_masses[np.arange(3), rep.permutation]
    cm = [cone_mass(mc, b) for b in cones_of(tup).cones]
    assert np.allclose(diag, cm, atol=1e-12)


def test_match_rotated(mixture_with_witness):
    mc, tup = mixture_with_witness
    eps = epsilon_match_max(2)
    t2 = tup.rotated(_small_rotation(2, np.deg2rad(3), 42))
    rep = match_tuples(mc, tup, t2, eps=eps)
    assert np.array_equal(rep.permutation, np.arange(3))
    diag = rep.intersection_masses[np.arange(3), rep.permutation]
    assert np.all(diag > 1 / 3 - 8 * eps)
    off = rep.intersection_masses.copy()
    off[np.arange(3), rep.permutation] = 0
    assert off.max() <= 1e-6


def test_match_weight_precondition(tri_tuple):
    m = make_measure([[0.0, -3.0], [0.0, -2.0]])  # weight far above the cap
    with pytest.raises(ValueError, match="weight"):
        match_tuples(m, tri_tuple, tri_tuple, eps=epsilon_match_max(2))


def test_match_shuffled_recovers_permutation(mixture_with_witness):
    mc, tup = mixture_with_witness
    perm = np.array([2, 0, 1])
    t2 = tup.reordered(perm)
    rep = match_tuples(mc, tup, t2, eps=epsilon_match_max(2))
    # cone i of tup equals cone perm^-1... verify via definition instead:
    # reordered tuple's cone j is tup's cone perm[j], so sigma must satisfy
    # sigma[perm[j]] = j
    for j in range(3):
        assert rep.permutation[perm[j]] == j


def test_interior_simplex_property(tri_tuple):
    rng = np.random.default_rng(3)
    cones = cones_of(tri_tuple).cones
    for _ in range(200):
        pts = []
        for c in cones:
            # random point strictly inside the cone: positive combination of
            # its generating rays
            rays = -np.linalg.inv(c.normals)
            lam = rng.random(2) + 0.05
            pts.append(rays @ lam)
        margin = hull_interior_margin(np.stack(pts))
        assert margin > 0


def test_match_transitivity(mixture_with_witness):
    mc, tup = mixture_with_witness
    eps = epsilon_match_max(2)
    tb = tup.rotated(_small_rotation(2, np.deg2rad(2), 7))
    tc = tup.rotated(_small_rotation(2, np.deg2rad(4), 8))
    sab = match_tuples(mc, tup, tb, eps=eps).permutation
    sbc = match_tuples(mc, tb, tc, eps=eps).permutation
    sac = match_tuples(mc, tup, tc, eps=eps).permutation
    assert np.array_equal(sac, sbc[sab])


def test_build_ordered_family(mixture_with_witness):
    mc, tup = mixture_with_witness
    d = 2
    a = 1 / 3 + 0.5 / (3 * 27)
    tups = [
        tup,
        tup.rotated(_small_rotation(2, np.deg2rad(2), 1)),
        tup.rotated(_small_rotation(2, np.deg2rad(4), 2)),
    ]
    fam = build_ordered_family(mc, a, tups)
    assert len(fam.tuples) == 3
    assert fam.reference_index == 0
    # reference is canonically labeled
    ref = fam.tuples[0]
    assert np.array_equal(ref.normals, canonical_labeling(ref).normals)
    # singleton family: reference order returned unchanged
    fam1 = build_ordered_family(mc, a, [tup])
    assert len(fam1.tuples) == 1


def test_build_family_weight_precondition(mixture_with_witness):
    mc, tup = mixture_with_witness
    # shift mass toward one cluster so the tuple weight exceeds the level
    labels = np.arange(mc.n) % 3
    w2 = mc.weights * (1 + 0.03 * (labels == 0))
    m2 = mc.reweighted(w2)
    a = 1 / 3 + 1e-6
    assert tuple_weight(m2, tup) > a
    with pytest.raises(ValueError, match="weight"):
        build_ordered_family(m2, a, [tup])


def test_family_order_stability_under_reweighting(mixture_with_witness):
    # reweighting within half the level gap keeps every matching identical
    mc, tup = mixture_with_witness
    d = 2
    a0 = 1 / 3 + 1 / 81
    a = 1 / 3 + 0.5 / 81
    a1 = (a + a0) / 2
    tups = [tup, tup.rotated(_small_rotation(2, np.deg2rad(2), 11))]
    fam = build_ordered_family(mc, a1, tups)
    rng = np.random.default_rng(12)
    delta = (a1 - a) / 2
    bump = rng.random(mc.n)
    w2 = mc.weights * (1 - delta) + delta * bump / bump.sum()
    m2 = mc.reweighted(w2)
    fam2 = build_ordered_family(m2, a1, tups)
    for t1, t2 in zip(fam.tuples, fam2.tuples):
        assert np.allclose(t1.normals, t2.normals)


def test_family_limit_closure(mixture_with_witness):
    # shrinking rotations converge to the reference; the limit's matching is
    # the eventual constant matching of the sequence
    mc, tup = mixture_with_witness
    eps = epsilon_match_max(2)
    perms = []
    for k in range(1, 6):
        tk = tup.rotated(_small_rotation(2, np.deg2rad(3.0 / k), 21))
        perms.append(match_tuples(mc, tup, tk, eps=eps).permutation)
    limit = match_tuples(mc, tup, tup, eps=eps).permutation
    for p in perms:
        assert np.array_equal(p, limit)

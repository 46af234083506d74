import numpy as np
import pytest

from depthlab.geometry import HalfSpace
from depthlab.measures import MeasureSpec, generate_measure, make_measure, halfspace_mass
from depthlab.depth import point_depth
from depthlab.median import (
    WitnessSearchError,
    min_normal_set,
    recenter,
    tukey_median,
    witness_tuple,
    witness_masses,
)
from depthlab.cones import is_generating, tuple_weight


def test_square_median_arrangement(square):
    r = tukey_median(square, mode="arrangement")
    assert r.depth == pytest.approx(0.5, abs=1e-12)
    assert point_depth(square, r.point).depth == pytest.approx(r.depth, abs=1e-12)


def test_triangle_median_arrangement(triangle):
    r = tukey_median(triangle, mode="arrangement")
    assert r.depth == pytest.approx(1 / 3, abs=1e-12)
    # maximizer is non-unique; any point of the closed triangle qualifies
    margin = np.min(1 - np.abs(r.point))
    assert point_depth(triangle, r.point).depth == pytest.approx(1 / 3, abs=1e-12)


def test_single_point_mass_median():
    m = make_measure([[3.0, -1.0]])
    r = tukey_median(m, mode="multistart", starts=4, iters=5)
    assert np.allclose(r.point, [3, -1])
    assert r.depth == 1.0


def test_arrangement_optimality_exhaustive():
    rng = np.random.default_rng(17)
    m = make_measure(rng.integers(-5, 6, size=(9, 2)).astype(float))
    r = tukey_median(m, mode="arrangement")
    # no arrangement vertex can beat the returned point
    import itertools

    pts = m.points
    best = r.depth
    for i, j in itertools.combinations(range(m.n), 2):
        d = pts[j] - pts[i]
        if np.linalg.norm(d) < 1e-12:
            continue
        for k, l in itertools.combinations(range(m.n), 2):
            e = pts[l] - pts[k]
            det = d[0] * e[1] - d[1] * e[0]
            if abs(det) < 1e-12:
                continue
            t = ((pts[k] - pts[i])[0] * e[1] - (pts[k] - pts[i])[1] * e[0]) / det
            x = pts[i] + t * d
            assert point_depth(m, x).depth <= best + 1e-12


def test_arrangement_mode_limits():
    m = make_measure(np.random.default_rng(0).standard_normal((10, 3)))
    with pytest.raises(ValueError):
        tukey_median(m, mode="arrangement")


def test_median_deterministic_in_seed():
    m = generate_measure(MeasureSpec("gaussian", 3, 200, {}, seed=6))
    a = tukey_median(m, mode="multistart", starts=6, iters=10, seed=3)
    b = tukey_median(m, mode="multistart", starts=6, iters=10, seed=3)
    assert np.array_equal(a.point, b.point) and a.depth == b.depth


def test_min_normal_set_triangle(triangle):
    ns = min_normal_set(triangle, [0, 0], tol=1e-9)
    assert ns.level == pytest.approx(1 / 3, abs=1e-12)
    assert ns.normals.shape[0] >= 3
    # each minimizing half-space contains exactly one vertex
    for nrm in ns.normals[:200]:
        mass = halfspace_mass(triangle, HalfSpace(nrm, 0.0))
        assert mass == pytest.approx(1 / 3, abs=1e-9)
    # normals fall into (at least) 3 angular clusters, one per vertex
    ang = np.mod(np.degrees(np.arctan2(ns.normals[:, 1], ns.normals[:, 0])), 360)
    centers = np.array([270.0, 30.0, 150.0])
    counts = [np.sum(np.minimum(np.abs(ang - c), 360 - np.abs(ang - c)) < 40) for c in centers]
    assert all(c > 0 for c in counts)


def test_min_normal_set_point_mass_level_one():
    m = make_measure([[0.0, 0.0]])
    ns = min_normal_set(m, [0, 0], tol=1e-9)
    assert ns.level == 1.0
    assert ns.normals.shape[0] >= 4096  # every sampled normal qualifies


def test_min_normal_set_symmetric_closed_under_negation(square):
    ns = min_normal_set(square, [0, 0], tol=1e-9)
    # for a centrally symmetric measure the minimizing set is symmetric:
    # every kept normal's negation also qualifies
    for nrm in ns.normals[:100]:
        mass = halfspace_mass(square, HalfSpace(-nrm, 0.0))
        assert mass <= ns.level + 1e-9


def test_witness_tuple_triangle(triangle):
    tup, ns = witness_tuple(triangle, [0, 0])
    # stored (generating) halves are the complements: mass 2/3 each
    for h in tup.halves:
        assert halfspace_mass(triangle, h) == pytest.approx(2 / 3, abs=1e-9)
    # the minimizing half-spaces behind them have mass 1/3 each
    assert np.allclose(witness_masses(triangle, [0, 0], tup), 1 / 3, atol=1e-9)
    flag, margin = is_generating(tup.normals)
    assert flag and margin > 1e-6
    assert tuple_weight(triangle, tup) == pytest.approx(1 / 3, abs=1e-9)


def test_witness_tuple_square(square):
    tup, _ = witness_tuple(square, [0, 0])
    flag, margin = is_generating(tup.normals)
    assert flag and margin > 1e-6
    # weight matches the median depth up to discretization
    assert tuple_weight(square, tup) == pytest.approx(0.5, abs=1e-9)


def test_witness_tuple_outside_hull_fails(square):
    with pytest.raises(WitnessSearchError):
        witness_tuple(square, [5.0, 5.0])


def test_witness_validity_invariant():
    for seed in (1, 2, 3):
        spec = MeasureSpec("simplex_mixture", 2, 150, {"sigma": 0.05}, seed)
        m = generate_measure(spec)
        mc, res = recenter(m, balanced=True, starts=8, iters=15, seed=seed)
        tup, ns = witness_tuple(mc, np.zeros(2), tol=1e-6, seed=seed)
        flag, _ = is_generating(tup.normals)
        assert flag
        assert tuple_weight(mc, tup) <= res.depth + 2e-6


def test_balanced_median_is_maximizer(square):
    from depthlab.median import balanced_median

    r = balanced_median(square, starts=6, iters=10)
    assert r.depth == pytest.approx(0.5, abs=1e-12)
    rl = tukey_median(square, mode="multistart", starts=6, iters=10)
    assert r.depth >= rl.depth - 1e-12


def test_recenter_moves_median_to_origin():
    m = generate_measure(MeasureSpec("gaussian", 2, 150, {}, seed=4)).translated([5.0, -3.0])
    mc, res = recenter(m, mode="multistart", starts=8, iters=20, seed=4)
    r2 = tukey_median(mc, mode="multistart", starts=8, iters=20, seed=4)
    assert np.linalg.norm(r2.point) <= np.linalg.norm(res.point - np.array([5.0, -3.0])) + 0.2
    assert r2.depth == pytest.approx(res.depth, abs=1e-12)  # translation invariance


def test_recenter_idempotent_up_to_tolerance(square):
    mc, res = recenter(square, mode="multistart", starts=6, iters=10)
    assert np.linalg.norm(res.point) <= 0.5  # already centered measure
    assert res.depth == pytest.approx(0.5, abs=1e-12)


def test_median_stability_under_reweighting():
    # total-variation perturbation moves the best depth by at most
    # delta plus search slack
    m = generate_measure(MeasureSpec("gaussian", 2, 200, {}, seed=9))
    base = tukey_median(m, mode="multistart", starts=8, iters=20, seed=9)
    rng = np.random.default_rng(10)
    w = m.weights.copy()
    bump = rng.random(m.n)
    bump = 0.05 * bump / bump.sum()
    w2 = w * (1 - 0.05) + bump
    m2 = m.reweighted(w2)
    delta = 0.5 * float(np.abs(w2 / w2.sum() - w).sum())
    r2 = tukey_median(m2, mode="multistart", starts=8, iters=20, seed=9)
    assert abs(r2.depth - base.depth) <= delta + 2.0 / m.n

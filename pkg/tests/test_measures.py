import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from depthlab.geometry import Flat, HalfSpace, SimplicialCone, line, sample_directions
from depthlab.measures import (
    MeasureSpec,
    cone_mass,
    generate_measure,
    halfspace_mass,
    load_measure,
    make_measure,
    measure_io,
    project_measure,
    save_measure,
    simplex_vertices,
)


def test_make_measure_normalizes():
    m = make_measure([[0, 0], [1, 0], [0, 1]], [1, 1, 1])
    assert np.allclose(m.weights, 1 / 3)


def test_make_measure_drops_zero_weight():
    m = make_measure([[0, 0], [1, 0], [0, 1]], [0, 2, 2])
    assert m.n == 2
    assert np.allclose(m.weights, 0.5)


def test_make_measure_rejects_negative():
    with pytest.raises(ValueError):
        make_measure([[0, 0], [1, 1]], [-1, 1])


def test_make_measure_rejects_empty():
    with pytest.raises(ValueError):
        make_measure(np.empty((0, 2)))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(min_value=0, max_value=10), min_size=2, max_size=8).filter(lambda w: sum(w) > 1e-6))
def test_make_measure_weight_sum_one(ws):
    pts = [[float(i), 0.0] for i in range(len(ws))]
    m = make_measure(pts, ws)
    assert m.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(m.weights > 0)


def test_simplex_mixture_cluster_masses():
    spec = MeasureSpec("simplex_mixture", 2, 300, {"sigma": 0.01}, seed=1)
    m = generate_measure(spec)
    verts = simplex_vertices(2)
    label = np.argmin(np.linalg.norm(m.points[:, None, :] - verts[None], axis=2), axis=1)
    for j in range(3):
        assert m.weights[label == j].sum() == pytest.approx(1 / 3, abs=0.1)


def test_uniform_ball_mean_near_origin():
    m = generate_measure(MeasureSpec("uniform_ball", 3, 2000, {}, seed=2))
    assert np.linalg.norm(m.weights @ m.points) < 0.1
    assert np.max(np.linalg.norm(m.points, axis=1)) <= 1 + 1e-12


def test_point_masses_echoes_make_measure():
    spec = MeasureSpec(
        "point_masses", 2, 2, {"points": [[1, 0], [0, 1]], "weights": [1, 3]}, seed=0
    )
    m = generate_measure(spec)
    assert np.allclose(m.weights, [0.25, 0.75])


def test_generate_measure_pure_function_of_spec():
    spec = MeasureSpec("gaussian", 3, 50, {"sigma": 2.0}, seed=9)
    a, b = generate_measure(spec), generate_measure(spec)
    assert np.array_equal(a.points, b.points) and np.array_equal(a.weights, b.weights)


def test_generate_measure_unknown_kind():
    with pytest.raises(ValueError, match="unknown measure kind"):
        MeasureSpec("nope", 2, 10)


def test_generate_measure_bad_sigma():
    with pytest.raises(ValueError, match="sigma"):
        MeasureSpec("gaussian", 2, 10, {"sigma": -1.0})


def test_project_measure_drops_z():
    m = make_measure([[1, 2, 3], [4, 5, 6]], [0.25, 0.75])
    p = project_measure(m, line([0, 0, 1]))
    assert p.dim == 2
    assert np.array_equal(p.weights, m.weights)
    assert np.allclose(np.sort(np.abs(p.points[0])), [1, 2])
    assert p.weights.sum() == pytest.approx(1.0)


def test_project_measure_composition_matches_direct():
    # projecting along a 2-flat equals projecting along a line inside it and
    # then along the image of the other direction, up to an isometry of the
    # 1-d image coordinates
    rng = np.random.default_rng(4)
    m = make_measure(rng.standard_normal((40, 3)))
    b1 = np.array([1.0, 0, 0])
    b2 = np.array([0, 1.0, 0])
    alpha = Flat(np.zeros(3), np.stack([b1, b2]))
    direct = project_measure(m, alpha)

    beta = Flat(np.zeros(3), b1[None])
    from depthlab.geometry import complement_basis

    c_beta = complement_basis(beta)
    mid = project_measure(m, beta)
    ell = c_beta @ b2
    final = project_measure(mid, line(ell))
    c_line = complement_basis(line(ell))
    c_alpha = complement_basis(alpha)
    o = c_line @ c_beta @ c_alpha.T  # 1x1 isometry aligning the two routes
    assert abs(abs(o[0, 0]) - 1) < 1e-10
    assert np.allclose(final.points, direct.points @ o.T, atol=1e-8)


def test_halfspace_mass_square(square):
    h = HalfSpace([1, 0], 0.0)
    assert halfspace_mass(square, h) == pytest.approx(3 / 4)  # closed side
    assert halfspace_mass(square, HalfSpace([1, 0], 2.0)) == pytest.approx(1.0)
    assert halfspace_mass(square, HalfSpace([1, 0], -2.0)) == pytest.approx(0.0)


def test_halfspace_mass_complement_property():
    rng = np.random.default_rng(11)
    m = make_measure(rng.standard_normal((60, 3)))
    for k in range(1000):
        u = rng.standard_normal(3)
        u /= np.linalg.norm(u)
        c = float(rng.standard_normal()) * 0.5
        h = HalfSpace(u, c)
        s = halfspace_mass(m, h) + halfspace_mass(m, h.complement())
        boundary = np.abs(m.points @ u - c) <= 1e-9
        assert s >= 1 - 1e-12
        if not boundary.any():
            assert s == pytest.approx(1.0, abs=1e-12)


def test_cone_mass_triangle(triangle):
    # cone around the top vertex
    b = SimplicialCone(np.zeros(2), [[-np.cos(np.pi / 6), -0.5], [np.cos(np.pi / 6), -0.5]])
    assert cone_mass(triangle, b) == pytest.approx(1 / 3)
    empty = SimplicialCone([10.0, 10.0], [[-1, 0], [0, -1]])
    assert cone_mass(triangle, empty) == pytest.approx(0.0)


def test_cone_partition_of_generating_tuple():
    rng = np.random.default_rng(5)
    m = make_measure(rng.standard_normal((200, 2)))
    ang = np.deg2rad([90, 210, 330])
    normals = np.column_stack([np.cos(ang), np.sin(ang)])
    cones = [SimplicialCone(np.zeros(2), np.delete(normals, i, 0)) for i in range(3)]
    masses = [cone_mass(m, c) for c in cones]
    total = sum(masses)
    assert total <= 1 + 1e-12
    from depthlab.geometry import cone_contains_many

    covered = np.zeros(m.n, dtype=bool)
    for c in cones:
        covered |= cone_contains_many(c, m.points)
    assert 1 - total == pytest.approx(float(m.weights[~covered].sum()), abs=1e-12)


def test_measure_io_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    m = make_measure(rng.standard_normal((100, 3)), rng.random(100) + 0.1)
    path = tmp_path / "m.json"
    save_measure(m, path)
    m2 = load_measure(path)
    assert np.max(np.abs(m.points - m2.points)) <= 1e-15
    assert np.max(np.abs(m.weights - m2.weights)) <= 1e-15


def test_measure_io_unified_entry(tmp_path):
    m = make_measure([[1, 2]])
    path = tmp_path / "m.json"
    assert measure_io(path, "save", m) is None
    m2 = measure_io(path, "load")
    assert np.array_equal(m2.points, m.points)
    with pytest.raises(ValueError):
        measure_io(path, "sideways")


def test_measure_io_bad_weight_sum(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"dim": 2, "points": [[0,0],[1,1]], "weights": [0.25, 0.25]}')
    with pytest.raises(ValueError, match="0.5"):
        load_measure(path)


def test_measure_io_bad_point_dim(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"dim": 3, "points": [[0,0,0],[1,1]], "weights": [0.5, 0.5]}')
    with pytest.raises(ValueError, match="index 1"):
        load_measure(path)


def test_measure_io_malformed(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"dim": 2, "points": [[0,0]')
    with pytest.raises(ValueError, match="line"):
        load_measure(path)

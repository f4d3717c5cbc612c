import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vesselfem.mesh import MeshError, RefinementSpec, build_grid, cells_in_ball, locate_cell


def _linear_scan_locate(mesh, p):
    lo, hi = mesh.cell_lower(), mesh.cell_lower() + mesh.cell_size()
    inside = np.all((lo <= p) & (p <= hi), axis=1)
    return int(np.flatnonzero(inside)[0])


def _linear_scan_ball(mesh, c, r):
    lo, hi = mesh.cell_lower(), mesh.cell_lower() + mesh.cell_size()
    return np.flatnonzero(np.all((lo <= c + r) & (hi >= c - r), axis=1))


def _adaptive_2d():
    return build_grid(2, (0, 0), (1, 1), RefinementSpec(2, 1, attractor_points=((0.5, 0.5),),
                                                        attractor_radius=0.3))


def test_uniform_2d_level3():
    m = build_grid(2, (0, 0), (1, 1), RefinementSpec(3))
    assert m.n_cells == 64
    assert m.h_min == pytest.approx(1 / 8)


def test_uniform_3d_level2_counts():
    m = build_grid(3, (0, 0, 0), (1, 1, 1), RefinementSpec(2))
    assert (m.n_cells, m.n_nodes) == (64, 125)


def test_attractor_refines_centre_only():
    m = _adaptive_2d()
    assert 16 < m.n_cells < 64
    centre_cells = cells_in_ball(m, (0.5, 0.5), 0.0)
    assert np.allclose(m.cell_size(centre_cells), 1 / 8)
    assert m.hanging  # refinement boundary creates hanging nodes
    assert m.max_level_jump() <= 1


def test_level_cap_refused():
    with pytest.raises(MeshError, match="cap"):
        RefinementSpec(10, 5)


def test_extent_must_be_positive():
    with pytest.raises(MeshError):
        build_grid(2, (0, 0), (1, 0), RefinementSpec(1))


def test_hanging_nodes_are_parent_means():
    m = _adaptive_2d()
    for node, parents in m.hanging.items():
        w = np.array([pw for _, pw in parents])
        assert w.sum() == pytest.approx(1.0)
        mean = sum(pw * m.nodes[p] for p, pw in parents)
        assert np.allclose(mean, m.nodes[node])


def test_every_boundary_facet_has_one_face_id():
    m = _adaptive_2d()
    keys = {(int(c), int(f)) for c, f in m.boundary_facets}
    assert len(keys) == len(m.boundary_facets)
    # facet area per face sums to the face length
    for f in range(4):
        cells = m.boundary_facets[m.boundary_facets[:, 1] == f, 0]
        assert m.cell_size(cells)[:, 1 - f // 2].sum() == pytest.approx(1.0)


def test_locate_cell_examples():
    m = build_grid(2, (0, 0), (1, 1), RefinementSpec(1))
    upper_right = locate_cell(m, (0.51, 0.51))
    assert np.allclose(m.cell_lower([upper_right])[0], (0.5, 0.5))
    incident = [c for c in range(4) if np.all(m.cell_lower([c])[0] <= 0.5)]
    assert locate_cell(m, (0.5, 0.5)) == min(incident)


def test_locate_cell_outside_raises():
    m = build_grid(2, (0, 0), (1, 1), RefinementSpec(1))
    with pytest.raises(MeshError):
        locate_cell(m, (1.1, 0.5))


def test_locate_matches_linear_scan_on_random_points():
    m = build_grid(3, (0, 0, 0), (1, 2, 1), RefinementSpec(
        2, 2, attractor_polylines=(np.array([[0.5, 0, 0.5], [0.5, 2, 0.5]]),),
        attractor_radius=0.2))
    rng = np.random.default_rng(0)
    pts = rng.random((1000, 3)) * m.extent
    # plus points exactly on grid lines to exercise the tie-break
    pts[:100] = np.round(pts[:100] * 8) / 8
    got = locate_cell(m, pts)
    assert all(got[k] == _linear_scan_locate(m, p) for k, p in enumerate(pts))


def test_cells_in_ball_examples():
    m = _adaptive_2d()
    assert list(cells_in_ball(m, (0.52, 0.53), 0.0)) == [locate_cell(m, (0.52, 0.53))]
    assert len(cells_in_ball(m, (0.5, 0.5), 5.0)) == m.n_cells


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 0.6))
def test_cells_in_ball_matches_linear_scan(x, y, r):
    m = _adaptive_2d()
    c = np.array([x, y])
    assert np.array_equal(np.sort(cells_in_ball(m, c, r)), _linear_scan_ball(m, c, r))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(0, 3),
       st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=3),
       st.floats(0.01, 0.5))
def test_volume_partition_and_balance(base, local, pts, radius):
    m = build_grid(2, (0, 0), (2.0, 0.5), RefinementSpec(
        base, local, attractor_points=tuple((2 * a, 0.5 * b) for a, b in pts),
        attractor_radius=radius))
    assert m.cell_volumes().sum() == pytest.approx(1.0, rel=1e-12)
    assert m.max_level_jump() <= 1


def test_volume_partition_3d_adaptive():
    m = build_grid(3, (0, 0, 0), (1, 1, 1), RefinementSpec(
        2, 3, attractor_points=((0.1, 0.2, 0.3),), attractor_radius=0.2))
    assert m.cell_volumes().sum() == pytest.approx(1.0, rel=1e-12)
    assert m.max_level_jump() <= 1

import numpy as np
import pytest

from couplefem import DegenerateCutError, LevelSet, build_structured_mesh, classify_cut
from couplefem.levelset import CUT, INSIDE_1, INSIDE_2, ghost_faces_brute_force, split_triangle
from couplefem.quadrature import polygon_area


def test_aligned_line_is_fitted():
    mesh = build_structured_mesh(4)
    cls = classify_cut(mesh, LevelSet.vertical_line(0.5))
    assert len(cls.cut_elements) == 0
    assert len(cls.ghost_faces) == 0
    assert set(cls.status.tolist()) == {INSIDE_1, INSIDE_2}
    assert len(cls.fitted_facets) == 4


def test_offset_line_cuts_one_column():
    mesh = build_structured_mesh(4)
    cls = classify_cut(mesh, LevelSet.vertical_line(0.45))
    # both triangles of each cell in the column straddling x = 0.45
    assert len(cls.cut_elements) == 8
    cents = mesh.vertices[mesh.triangles[cls.cut_elements]].mean(axis=1)
    assert np.all((cents[:, 0] > 0.25) & (cents[:, 0] < 0.5))


def test_reference_triangle_split():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    neg, pos, seg = split_triangle(pts, np.array([-0.5, 0.5, -0.5]))
    assert polygon_area(neg) == pytest.approx(3.0 / 8.0, abs=1e-15)
    assert polygon_area(pos) == pytest.approx(1.0 / 8.0, abs=1e-15)
    seg = seg[np.argsort(seg[:, 1])]
    assert np.allclose(seg, [[0.5, 0.0], [0.5, 0.5]])


def test_cut_cell_normal_points_outward():
    phi = LevelSet.circle((0.5, 0.5), 0.3)
    mesh = build_structured_mesh(8)
    cls = classify_cut(mesh, phi)
    for cell in cls.cells:
        mid = cell.seg.mean(axis=0)
        radial = mid - np.array([0.5, 0.5])
        radial /= np.linalg.norm(radial)
        # aligned with the exact outward radial up to linearization error
        assert np.dot(cell.normal, radial) > 0.9
        # and phi increases along the normal: it points into subdomain 2
        step = 0.01 * cell.h * cell.normal
        assert phi(mid[None, :] + step) > phi(mid[None, :] - step)


def test_cut_volume_consistency_random_circles():
    mesh = build_structured_mesh(8)
    rng = np.random.default_rng(7)
    for _ in range(100):
        center = rng.uniform(0.2, 0.8, 2)
        radius = rng.uniform(0.15, 0.45)
        cls = classify_cut(mesh, LevelSet.circle(center, radius))
        for cell in cls.cells:
            total = cell.area1 + cell.area2
            ref = mesh.tri_areas[cell.element]
            assert abs(total - ref) <= 1e-12 * ref


def test_ghost_faces_match_brute_force():
    mesh = build_structured_mesh(8)
    for phi in (LevelSet.circle((0.5, 0.5), 0.3), LevelSet.vertical_line(0.37),
                LevelSet.half_circle(0.74)):
        cls = classify_cut(mesh, phi)
        assert np.array_equal(cls.ghost_faces, ghost_faces_brute_force(mesh, cls.status))
        # every ghost face is interior and touches a cut element
        for fid in cls.ghost_faces:
            ta, tb = mesh.facet_tris[fid]
            assert tb >= 0
            assert cls.status[ta] == CUT or cls.status[tb] == CUT


def test_level_set_missing_mesh():
    mesh = build_structured_mesh(4)
    cls = classify_cut(mesh, LevelSet.circle((0.5, 0.5), 5.0))
    assert len(cls.cut_elements) == 0
    assert len(cls.ghost_faces) == 0
    assert set(cls.status.tolist()) == {INSIDE_1}
    cls2 = classify_cut(mesh, LevelSet.circle((10.0, 10.0), 1.0))
    assert set(cls2.status.tolist()) == {INSIDE_2}


def test_degenerate_level_set_rejected():
    mesh = build_structured_mesh(4)
    with pytest.raises(DegenerateCutError):
        classify_cut(mesh, lambda p: np.zeros(len(p)))


def test_half_circle_matches_circle_at_origin():
    mesh = build_structured_mesh(16)
    phi = LevelSet.half_circle(0.74)
    ref = LevelSet.circle((0.0, 0.0), 0.74)
    pts = mesh.vertices
    assert np.allclose(phi(pts), ref(pts))
    cls = classify_cut(mesh, phi)
    # the origin side is subdomain 1
    assert cls.status[0] == INSIDE_1
    assert len(cls.cut_elements) > 0

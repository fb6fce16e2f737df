import math

import numpy as np
import pytest

from crosslift.geometry import (
    Box,
    GeneralPositionViolation,
    GeometryError,
    Hyperplane,
    Interval,
    Tolerance,
)
from crosslift.shapes import (
    Annulus2D,
    Ball,
    BentSweep,
    Capsule,
    Disk2D,
    EXTERNAL,
    INTERNAL,
    Shape,
    SolidTorus,
    Tube,
)

TOL = Tolerance.for_diameter(6.0)


def test_ball_contains():
    ball = Shape([Ball(np.zeros(3), 1.0)])
    assert ball.contains(np.zeros(3))
    assert not ball.contains(np.array([2.0, 0, 0]))


def test_torus_membership_matches_implicit_oracle():
    R, r = 2.0, 0.5
    torus = Shape([SolidTorus(np.zeros(3), np.array([0, 0, 1.0]), R, r)])
    rng = np.random.default_rng(0)
    pts = rng.uniform(-3, 3, size=(10000, 3))
    implicit = (np.sqrt(pts[:, 0] ** 2 + pts[:, 1] ** 2) - R) ** 2 + pts[:, 2] ** 2 <= r ** 2
    assert np.array_equal(torus.contains_batch(pts), implicit)


def test_boundary_normal_examples():
    ball = Shape([Ball(np.zeros(3), 1.0)])
    assert np.allclose(ball.boundary_normal(np.array([1.0, 0, 0])), [1, 0, 0])
    torus = Shape([SolidTorus(np.zeros(3), np.array([0, 0, 1.0]), 2.0, 0.5)])
    n = torus.boundary_normal(np.array([2.5, 0, 0]))
    assert np.allclose(n, [1, 0, 0], atol=1e-12)
    with pytest.raises(GeometryError):
        ball.boundary_normal(np.array([0.2, 0, 0]))


def test_boundary_normals_match_finite_differences():
    shapes = [
        Shape([SolidTorus(np.array([0.1, -0.2, 0.3]), np.array([0.2, 0.3, 1.0]),
                          1.5, 0.4)]),
        Shape([Capsule(np.array([-0.5, 0, 0]), np.array([0.7, 0.2, 0.1]), 0.45)]),
    ]
    rng = np.random.default_rng(1)
    h = 1e-6
    for shape in shapes:
        pts = shape.boundary_samples(rng, 200)
        normals = shape.boundary_normals_batch(pts)
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            g = (shape.signed_distance(pts + e) - shape.signed_distance(pts - e)) / (2 * h)
            # compare per-axis gradient with the analytic normal
            ang_ok = np.abs(g - normals[:, k]) < 2e-5
            assert np.mean(ang_ok) > 0.99


def test_sections_ball():
    ball = Shape([Ball(np.zeros(3), 1.0)])
    secs = ball.section_of(Hyperplane(np.array([0, 0, 1.0]), 0.0), 0.005, TOL)
    assert len(secs) == 1
    r = np.linalg.norm(secs[0].outer, axis=1)
    assert np.allclose(r, 1.0, atol=1e-9)
    secs = ball.section_of(Hyperplane(np.array([0, 0, 1.0]), 0.6), 0.005, TOL)
    r = np.linalg.norm(secs[0].outer - secs[0].outer.mean(axis=0), axis=1)
    assert np.allclose(r, 0.8, atol=1e-3)


def test_sections_torus_annulus():
    torus = Shape([SolidTorus(np.zeros(3), np.array([0, 0, 1.0]), 2.0, 0.5)])
    secs = torus.section_of(Hyperplane(np.array([0, 0, 1.0]), 0.0), 0.01, TOL)
    assert len(secs) == 1
    assert len(secs[0].holes) == 1
    router = np.linalg.norm(secs[0].outer, axis=1)
    rinner = np.linalg.norm(secs[0].holes[0], axis=1)
    assert np.allclose(router, 2.5, atol=0.01)
    assert np.allclose(rinner, 1.5, atol=0.01)
    # vertical plane through the axis cuts the tube twice
    secs = torus.section_of(Hyperplane(np.array([1.0, 0, 0]), 0.0), 0.01, TOL)
    assert len(secs) == 2


def test_section_tangent_plane_rejected():
    ball = Shape([Ball(np.zeros(3), 1.0)])
    with pytest.raises(GeneralPositionViolation):
        ball.section_of(Hyperplane(np.array([0, 0, 1.0]), 1.0 - 1e-12), 0.005, TOL)


def test_sections_2d_intervals():
    shape = Shape([Annulus2D(np.zeros(2), 1.5, 2.5)])
    line = Hyperplane(np.array([0.0, 1.0]), 0.0)
    secs = shape.section_of(line, 0.005, TOL)
    assert len(secs) == 2
    lens = sorted(s.length() for s in secs)
    assert lens[0] == pytest.approx(1.0, abs=1e-9)  # chord minus inner chord
    disk = Shape([Disk2D(np.zeros(2), 1.0)])
    secs = disk.section_of(Hyperplane(np.array([0.0, 1.0]), 0.6), 0.005, TOL)
    assert secs[0].length() == pytest.approx(1.6, abs=1e-12)


def test_medial_samples_examples():
    ball = Shape([Ball(np.array([0.3, 0.1, -0.2]), 0.9)])
    ms = ball.medial_samples(INTERNAL, 8)
    assert len(ms) == 1
    assert np.allclose(ms[0].point, [0.3, 0.1, -0.2])
    assert ms[0].radius == pytest.approx(0.9)
    assert ball.medial_samples(EXTERNAL, 8) == []

    torus = Shape([SolidTorus(np.zeros(3), np.array([0, 0, 1.0]), 2.0, 0.5)])
    ms = torus.medial_samples(INTERNAL, 8)
    assert len(ms) == 8
    for m in ms:
        assert np.linalg.norm(m.point[:2]) == pytest.approx(2.0)
        assert m.point[2] == pytest.approx(0.0)
        assert m.radius == pytest.approx(0.5)

    cap = Shape([Capsule(np.array([0.0, 0, 0]), np.array([1.0, 0, 0]), 0.4)])
    for m in cap.medial_samples(INTERNAL, 12):
        d = abs(float(cap.components[0].signed_distance(m.point[None, :])[0]))
        assert d == pytest.approx(0.4, abs=1e-12)


def test_internal_medial_balls_empty_of_boundary():
    shape = Shape([SolidTorus(np.zeros(3), np.array([0, 0, 1.0]), 2.0, 0.5)])
    rng = np.random.default_rng(2)
    boundary = shape.boundary_samples(rng, 4000)
    for m in shape.medial_samples(INTERNAL, 6):
        assert shape.contains(m.point)
        dmin = np.min(np.linalg.norm(boundary - m.point, axis=1))
        assert dmin >= m.radius - 1e-6


def test_reach_examples():
    assert Shape([Ball(np.zeros(3), 1.0)]).reach() == pytest.approx(1.0)
    torus = Shape([SolidTorus(np.zeros(3), np.array([0, 0, 1.0]), 2.0, 0.5)])
    assert torus.reach() == pytest.approx(0.5)  # min(minor, major - minor)
    two = Shape([Ball(np.zeros(3), 1.0), Ball(np.array([3.0, 0, 0]), 1.0)])
    assert two.reach() == pytest.approx(0.5)  # half the surface gap


def test_reach_sampled_agrees():
    torus = Shape([SolidTorus(np.zeros(3), np.array([0, 0, 1.0]), 2.0, 0.5)])
    assert torus.reach_sampled(1500) == pytest.approx(0.5, abs=1e-6)
    two = Shape([Ball(np.zeros(3), 1.0), Ball(np.array([3.0, 0, 0]), 1.0)])
    # the minimizing boundary point is a pole; nearby samples overshoot a bit
    assert two.reach_sampled(3000) == pytest.approx(0.5, abs=5e-3)


def test_reach_in_cell_lower_bounded_by_global(tmp_path):
    from crosslift.arrangement import build_arrangement

    shape = Shape([Ball(np.zeros(3), 1.0)])
    box = Box(np.array([-1.5] * 3), np.array([1.5] * 3))
    arr = build_arrangement([Hyperplane(np.array([0, 0, 1.0]), 0.2)], box, TOL)
    g = shape.reach()
    for cell in arr.cells:
        rc = shape.reach_in_cell(cell, 400, bbox=box)
        assert rc >= g - 1e-6


def test_external_medial_between_two_balls():
    two = Shape([Ball(np.zeros(3), 1.0), Ball(np.array([3.0, 0, 0]), 1.0)])
    box = Box(np.array([-1.5, -1.5, -1.5]), np.array([4.5, 1.5, 1.5]))
    ms = two.medial_samples(EXTERNAL, 200, box)
    assert len(ms) > 0
    radii = [m.radius for m in ms]
    assert min(radii) == pytest.approx(0.5, abs=0.02)  # bisector mid-gap


def test_boundary_sheets_cut():
    ball = Shape([Ball(np.zeros(3), 1.0)])
    ok, sheets = _cut(ball, [Hyperplane(np.array([0, 0, 1.0]), 0.0)])
    assert ok and sheets == [(0, 0, True)]
    ok, sheets = _cut(ball, [Hyperplane(np.array([0, 0, 1.0]), 2.0)])
    assert not ok
    ann = Shape([Annulus2D(np.zeros(2), 1.0, 2.0)])
    # a line crossing only the outer ring leaves the inner contour uncut
    ok, sheets = _cut(ann, [Hyperplane(np.array([0.0, 1.0]), 1.5)])
    assert not ok
    assert [c for (_, _, c) in sheets] == [True, False]
    ok, _ = _cut(ann, [Hyperplane(np.array([0.0, 1.0]), 0.5)])
    assert ok


def _cut(shape, planes):
    sheets = shape.boundary_sheets_cut(planes)
    return all(c for (_, _, c) in sheets), sheets


def test_boundary_cut_matches_contour_sampling_oracle():
    ann = Shape([Annulus2D(np.array([0.4, -0.3]), 0.8, 1.7)])
    rng = np.random.default_rng(3)
    th = rng.uniform(0, 2 * math.pi, 500)
    for off in (0.2, 1.0, 1.9, 2.5):
        plane = Hyperplane(np.array([0.0, 1.0]), off)
        sheets = ann.boundary_sheets_cut([plane])
        for (ci, k, cut) in sheets:
            r = [ann.components[0].r_outer, ann.components[0].r_inner][k]
            pts = ann.components[0].center + r * np.stack([np.cos(th), np.sin(th)], axis=1)
            vals = pts @ plane.normal - plane.offset
            assert cut == bool(vals.min() < 0 < vals.max())


def test_tube_straight_equals_capsule():
    tube = Tube(np.array([[0.0, 0, 0], [0.5, 0, 0], [1.0, 0, 0]]), 0.3)
    assert tube.is_straight()
    assert tube.reach() == pytest.approx(0.3)
    bent = Tube(np.array([[0.0, 0, 0], [1.0, 0, 0], [1.0, 1.0, 0]]), 0.2)
    assert not bent.is_straight()
    with pytest.raises(GeometryError):
        bent.reach()
    # membership still works for bent cores
    assert bent.signed_distance(np.array([[1.0, 0.5, 0.0]]))[0] < 0


def test_bent_sweep_sections_morph():
    sw = BentSweep(half_len=1.0, half_width=0.22, morph_height=0.6,
                   sag_max=0.9, z_margin=0.15)
    shape = Shape([sw])
    p0 = Hyperplane(np.array([0, 0, 1.0]), 0.0)
    p1 = Hyperplane(np.array([0, 0, 1.0]), 0.6)
    bottom = shape.section_of(p0, 0.004, TOL)
    top = shape.section_of(p1, 0.004, TOL)
    assert len(bottom) == 1 and len(top) == 1
    # world-y extents: the bar hugs the x-axis, the arch rises to the sagitta
    yb = p0.to_world(bottom[0].outer)[:, 1]
    yt = p1.to_world(top[0].outer)[:, 1]
    assert yb.max() < 0.3
    assert yt.max() > 0.9
    # both end regions overlap in projection near (+-1, 0)
    for sgn in (-1, 1):
        near_b = bottom[0].contains(p0.to_local(np.array([[sgn, 0.0, 0.0]]))[0], TOL)
        near_t = top[0].contains(p1.to_local(np.array([[sgn, 0.0, 0.6]]))[0], TOL)
        assert near_b >= 0 and near_t >= 0


def test_shape_validation():
    with pytest.raises(GeometryError):
        Shape([])
    overlapping = Shape([Ball(np.zeros(3), 1.0), Ball(np.array([1.0, 0, 0]), 1.0)])
    with pytest.raises(GeometryError):
        overlapping.validate_disjoint(0.05)

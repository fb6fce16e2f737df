import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crosslift.geometry import (
    Box,
    GeometryError,
    Hyperplane,
    INSIDE,
    Interval,
    ON_BOUNDARY,
    OUTSIDE,
    PolygonWithHoles,
    Tolerance,
    point_in_polygon,
    signed_distance,
    winding_number,
)

TOL = Tolerance()


def test_signed_distance_axis_aligned():
    h = Hyperplane(np.array([0.0, 0.0, 1.0]), 0.0)
    assert signed_distance(np.array([0.0, 0.0, 1.0]), h) == pytest.approx(1.0)


def test_signed_distance_membership():
    h = Hyperplane(np.array([0.0, 1.0]), 0.25)
    assert signed_distance(np.array([3.0, 0.25]), h) == pytest.approx(0.0, abs=1e-15)


def test_signed_distance_matches_projection_oracle():
    rng = np.random.default_rng(42)
    for _ in range(200):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        h = Hyperplane(n, float(rng.uniform(-2, 2)))
        x = rng.uniform(-3, 3, 3)
        d = signed_distance(x, h)
        proj = x - d * h.normal
        # the closed-form projection lands on the plane and realizes |d|
        assert abs(signed_distance(proj, h)) < 1e-12
        assert np.linalg.norm(x - proj) == pytest.approx(abs(d), abs=1e-12)
        # no plane point sampled around the projection comes closer
        origin, u = h.basis()
        loc = h.to_local(proj[None, :])[0]
        around = h.to_world(loc + rng.uniform(-1, 1, size=(50, 2)))
        assert np.min(np.linalg.norm(around - x, axis=1)) >= abs(d) - 1e-12


@settings(max_examples=60, derandomize=True)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-3, 3), st.floats(-3, 3))
def test_signed_distance_linear_along_normal(x, y, off, t):
    h = Hyperplane(np.array([0.6, 0.8]), off)
    p = np.array([x, y])
    d0 = signed_distance(p, h)
    dt = signed_distance(p + t * h.normal, h)
    assert dt == pytest.approx(d0 + t, abs=1e-12 * (1 + abs(d0) + abs(t)))


def test_hyperplane_normalizes():
    h = Hyperplane(np.array([0.0, 2.0]), 4.0)
    assert np.allclose(h.normal, [0, 1])
    assert h.offset == pytest.approx(2.0)
    with pytest.raises(GeometryError):
        Hyperplane(np.array([0.0, 0.0]), 1.0)


def unit_square():
    return PolygonWithHoles(np.array([[0.0, 0], [1, 0], [1, 1], [0, 1]]))


def square_with_hole():
    return PolygonWithHoles(
        np.array([[0.0, 0], [4, 0], [4, 4], [0, 4]]),
        holes=[np.array([[1.0, 1], [3, 1], [3, 3], [1, 3]])],
    )


def test_point_in_polygon_center():
    assert point_in_polygon(np.array([0.5, 0.5]), unit_square(), TOL) == INSIDE


def test_point_in_hole_is_outside():
    assert point_in_polygon(np.array([2.0, 2.0]), square_with_hole(), TOL) == OUTSIDE
    assert point_in_polygon(np.array([0.5, 0.5]), square_with_hole(), TOL) == INSIDE


def test_point_on_boundary():
    assert point_in_polygon(np.array([0.5, 0.0]), unit_square(), TOL) == ON_BOUNDARY


def test_point_in_polygon_vs_winding_oracle():
    rng = np.random.default_rng(7)
    poly = square_with_hole()
    pts = rng.uniform(-0.5, 4.5, size=(1000, 2))
    cls = poly.contains_batch(pts, TOL)
    for p, c in zip(pts, cls):
        if c == ON_BOUNDARY:
            continue
        w = winding_number(p, poly)
        assert (w % 2 == 1) == (c == INSIDE)


def test_point_in_polygon_rigid_motion_invariant():
    rng = np.random.default_rng(3)
    poly = square_with_hole()
    ang = 0.83
    R = np.array([[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]])
    t = np.array([1.3, -0.7])
    moved = PolygonWithHoles(poly.outer @ R.T + t,
                             [h @ R.T + t for h in poly.holes])
    pts = rng.uniform(-0.5, 4.5, size=(300, 2))
    a = poly.contains_batch(pts, TOL)
    b = moved.contains_batch(pts @ R.T + t, TOL)
    keep = (a != ON_BOUNDARY) & (b != ON_BOUNDARY)
    assert np.array_equal(a[keep], b[keep])


def test_degenerate_polygon_rejected():
    with pytest.raises(GeometryError):
        PolygonWithHoles(np.array([[0.0, 0], [1, 0]]))
    flat = PolygonWithHoles(np.array([[0.0, 0], [1, 0], [2, 0]]))
    with pytest.raises(GeometryError):
        flat.contains_batch(np.zeros((1, 2)), TOL)


def test_polygon_validate_hole_outside():
    bad = PolygonWithHoles(
        np.array([[0.0, 0], [1, 0], [1, 1], [0, 1]]),
        holes=[np.array([[2.0, 2], [3, 2], [3, 3], [2, 3]])],
    )
    with pytest.raises(GeometryError):
        bad.validate(TOL)


def test_interval():
    iv = Interval(2.0, 1.0)  # reorders
    assert (iv.lo, iv.hi) == (1.0, 2.0)
    assert iv.contains(1.5, TOL) == INSIDE
    assert iv.contains(1.0, TOL) == ON_BOUNDARY
    assert iv.contains(2.5, TOL) == OUTSIDE
    assert iv.intersect(Interval(1.8, 3.0)).length() == pytest.approx(0.2)
    assert iv.intersect(Interval(5.0, 6.0)) is None


def test_box():
    with pytest.raises(GeometryError):
        Box(np.array([0.0, 0]), np.array([0.0, 1]))
    b = Box(np.array([0.0, 0, 0]), np.array([1.0, 2, 3]))
    assert b.contains([0.5, 1, 2])
    assert not b.contains([1.5, 1, 2])
    assert len(b.walls()) == 6


def test_plane_basis_roundtrip():
    rng = np.random.default_rng(11)
    for dim in (2, 3):
        n = rng.normal(size=dim)
        h = Hyperplane(n, 0.7)
        pts = rng.normal(size=(20, dim))
        on_plane = pts - (pts @ h.normal - h.offset)[:, None] * h.normal
        back = h.to_world(h.to_local(on_plane))
        assert np.allclose(back, on_plane, atol=1e-12)

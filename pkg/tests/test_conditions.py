import math

import numpy as np
import pytest

from crosslift.arrangement import build_arrangement, cell_height
from crosslift.conditions import (
    check_boundary_cut,
    check_density,
    check_separation_sampled,
    contact_angles,
    evaluate_conditions,
)
from crosslift.geometry import Box, GeneralPositionViolation, Hyperplane, Tolerance
from crosslift.reconstruction import SectionSet
from crosslift.shapes import Ball, Shape

TOL = Tolerance.for_diameter(6.0)
BOX = Box(np.array([-1.5] * 3), np.array([1.5] * 3))


def hp(n, o):
    return Hyperplane(np.asarray(n, dtype=float), float(o))


def ball_scene(offsets, radius=1.0):
    shape = Shape([Ball(np.zeros(3), radius)])
    planes = [hp([0, 0, 1], o) for o in offsets]
    arr = build_arrangement(planes, BOX, TOL)
    secs = SectionSet.from_shape(shape, planes, 0.01, TOL)
    return shape, arr, secs


def slab_cell_condition(rep, arr):
    cid = arr.locate_cell(np.zeros(3))
    return next(c for c in rep.cells if c.cell_id == cid)


def test_density_slab_pass():
    shape, arr, secs = ball_scene([-0.75, 0.75])
    rep = evaluate_conditions(shape, arr, secs, n_samples=2000)
    slab = slab_cell_condition(rep, arr)
    assert slab.height == pytest.approx(0.75)
    assert slab.reach == pytest.approx(1.0, abs=1e-3)
    assert slab.c1 is True


def test_density_slab_fail_wide_spacing():
    shape, arr, secs = ball_scene([-1.25, 1.25])
    rep = evaluate_conditions(shape, arr, secs, n_samples=2000)
    slab = slab_cell_condition(rep, arr)
    assert slab.height == pytest.approx(1.25)
    assert slab.c1 is False


def test_density_no_planes_fails():
    shape = Shape([Ball(np.zeros(3), 1.0)])
    arr = build_arrangement([], BOX, TOL)
    secs = SectionSet.from_shape(shape, [], 0.01, TOL)
    rep = evaluate_conditions(shape, arr, secs, n_samples=1000)
    only = rep.cells[0]
    assert math.isinf(only.height)
    assert not only.vacuous
    assert only.c1 is False


def test_vacuous_cells_pass():
    # a far-away slab never touches the ball or its medial axis
    shape = Shape([Ball(np.array([0, 0, -1.0]), 0.3)])
    planes = [hp([0, 0, 1], 0.9), hp([0, 0, 1], 1.2)]
    arr = build_arrangement(planes, BOX, TOL)
    secs = SectionSet.from_shape(shape, planes, 0.003, TOL)
    rep = evaluate_conditions(shape, arr, secs, n_samples=2000)
    vac = [c for c in rep.cells if c.vacuous]
    assert vac and all(c.c1 is True and c.c2 is True for c in vac)


def test_contact_angle_formula():
    shape, arr, secs = ball_scene([0.6])
    a = contact_angles(shape, arr, secs)
    for v in a.values():
        assert v == pytest.approx(math.asin(0.6), abs=1e-6)


def test_transversality_threshold_and_implication():
    # equatorial cut: alpha ~ 0 in the cells, threshold = reach/2
    shape, arr, secs = ball_scene([-0.4, 0.0, 0.4])
    rep = evaluate_conditions(shape, arr, secs, n_samples=2000,
                              reach_lower_bound=1.0)
    for c in rep.cells:
        if c.vacuous:
            continue
        thr = 0.5 * (1 - math.sin(c.alpha)) * c.reach
        assert (c.c2 is True) == (thr - c.height > 0) or c.c2 is None
        if c.c2 is True:
            assert c.c1 is True  # transversality implies density
    assert rep.implication_holds()


def test_tangential_cut_rejected():
    shape = Shape([Ball(np.zeros(3), 1.0)])
    planes = [hp([0, 0, 1], 1.0 - 1e-12)]
    with pytest.raises(GeneralPositionViolation):
        SectionSet.from_shape(shape, planes, 0.01, TOL)


def test_separation_pass_on_dense_scene():
    shape, arr, secs = ball_scene([-0.75, 0.0, 0.75])
    ok, witnesses = check_separation_sampled(shape, arr, secs, n=100, tol=TOL)
    assert ok and witnesses == []


def test_separation_fails_when_section_missing():
    # planes miss the ball entirely: the internal medial point is dry
    shape = Shape([Ball(np.zeros(3), 0.4)])
    planes = [hp([0, 0, 1], -1.2), hp([0, 0, 1], 1.2)]
    arr = build_arrangement(planes, BOX, TOL)
    secs = SectionSet.from_shape(shape, planes, 0.004, TOL)
    ok, witnesses = check_separation_sampled(shape, arr, secs, n=50, tol=TOL)
    assert ok is False
    assert any(side == "internal" for (_, side, _) in witnesses)


def test_boundary_cut_examples():
    ball = Shape([Ball(np.zeros(3), 1.0)])
    ok, _ = check_boundary_cut(ball, [hp([0, 0, 1], 0.0)])
    assert ok
    ok, _ = check_boundary_cut(ball, [hp([0, 0, 1], 1.4)])
    assert not ok


def test_adding_planes_never_increases_height():
    rng = np.random.default_rng(8)
    base = [hp([0, 0, 1], -0.4), hp([0, 1, 0], 0.2)]
    extra = hp(rng.normal(size=3), 0.1)
    arr1 = build_arrangement(base, BOX, TOL)
    arr2 = build_arrangement(base + [extra], BOX, TOL)
    pts = BOX.sample(rng, 200)
    for p in pts:
        c1 = arr1.cells[arr1.locate_cell(p)]
        c2 = arr2.cells[arr2.locate_cell(p)]
        h1, h2 = cell_height(c1, TOL), cell_height(c2, TOL)
        assert h2 <= h1 + 1e-9


def test_check_density_function():
    shape, arr, secs = ball_scene([-0.75, 0.75])
    per_cell = check_density(arr, shape, n_samples=2000)
    cid = arr.locate_cell(np.zeros(3))
    assert per_cell[cid] is True


def test_reach_lower_bound_mode():
    shape, arr, secs = ball_scene([-0.75, 0.75])
    rep = evaluate_conditions(shape, arr, secs, n_samples=500,
                              reach_lower_bound=0.9)
    slab = slab_cell_condition(rep, arr)
    assert slab.reach == pytest.approx(0.9)
    assert slab.c1 is True
    rep2 = evaluate_conditions(shape, arr, secs, n_samples=500,
                               reach_lower_bound=0.5)
    slab2 = slab_cell_condition(rep2, arr)
    assert slab2.c1 is False  # conservative under a weak bound


def test_report_serialization():
    shape, arr, secs = ball_scene([-0.75, 0.75])
    rep = evaluate_conditions(shape, arr, secs, n_samples=800)
    d = rep.to_dict()
    assert d["all_c1"] in (True, False)
    assert isinstance(d["cells"], list) and d["cells"]
    assert {"cell", "height", "reach", "alpha", "c1", "c2"} <= set(d["cells"][0])

import math

import numpy as np
import pytest

from crosslift.arrangement import build_arrangement
from crosslift.geometry import Box, GeometryError, Hyperplane, Interval, Tolerance
from crosslift.reconstruction import (
    IndicatorGrid,
    PlaneFrame,
    SectionSet,
    in_reconstruction_batch,
    reconstruct_2d,
    reconstruction_grid,
)
from crosslift.shapes import Ball, Shape, SolidTorus
from crosslift.topology import (
    betti_2d,
    component_bijection,
    cubical_betti_2d,
    cubical_betti_3d,
)

TOL = Tolerance.for_diameter(6.0)


def hp(n, o):
    return Hyperplane(np.asarray(n, dtype=float), float(o))


def test_cubical_solid_ball():
    ball = Shape([Ball(np.zeros(3), 1.0)])
    g = IndicatorGrid.sample(ball.contains_batch,
                             Box(np.array([-1.2] * 3), np.array([1.2] * 3)), 0.08)
    assert cubical_betti_3d(g).betti == (1, 0, 0)


def test_cubical_solid_torus():
    torus = Shape([SolidTorus(np.zeros(3), np.array([0, 0, 1.0]), 1.0, 0.4)])
    g = IndicatorGrid.sample(torus.contains_batch,
                             Box(np.array([-1.6] * 3), np.array([1.6] * 3)), 0.05)
    t = cubical_betti_3d(g)
    assert t.betti == (1, 1, 0)
    assert t.euler == t.beta0 - t.beta1 + t.beta2


def test_cubical_hollow_ball_cavity():
    shell = lambda pts: (np.linalg.norm(pts, axis=1) <= 1.0) & \
                        (np.linalg.norm(pts, axis=1) >= 0.5)
    g = IndicatorGrid.sample(shell, Box(np.array([-1.2] * 3), np.array([1.2] * 3)),
                             0.06)
    assert cubical_betti_3d(g).betti == (1, 0, 1)


def test_cubical_resolution_stability():
    torus = Shape([SolidTorus(np.zeros(3), np.array([0, 0, 1.0]), 1.0, 0.4)])
    box = Box(np.array([-1.6] * 3), np.array([1.6] * 3))
    b1 = cubical_betti_3d(IndicatorGrid.sample(torus.contains_batch, box, 0.08))
    b2 = cubical_betti_3d(IndicatorGrid.sample(torus.contains_batch, box, 0.04))
    assert b1.betti == b2.betti == (1, 1, 0)


def test_cubical_grid_too_coarse_errors():
    ball = Shape([Ball(np.zeros(3), 1.0)])
    g = IndicatorGrid.sample(ball.contains_batch,
                             Box(np.array([-1.2] * 3), np.array([1.2] * 3)), 0.4)
    with pytest.raises(GeometryError):
        cubical_betti_3d(g, min_feature=1.0)
    cubical_betti_3d(g, min_feature=1.0, force=True)


def test_cubical_2d_disk_annulus():
    disk = lambda pts: np.linalg.norm(pts, axis=1) <= 1.0
    ann = lambda pts: (np.linalg.norm(pts, axis=1) <= 1.0) & \
                      (np.linalg.norm(pts, axis=1) >= 0.5)
    box = Box(np.array([-1.2, -1.2]), np.array([1.2, 1.2]))
    t = cubical_betti_2d(IndicatorGrid.sample(disk, box, 0.04).occupancy)
    assert (t.beta0, t.beta1) == (1, 0) and t.holes_per_component == (0,)
    t = cubical_betti_2d(IndicatorGrid.sample(ann, box, 0.04).occupancy)
    assert (t.beta0, t.beta1) == (1, 1) and t.holes_per_component == (1,)


def square_scene():
    lines = [hp([1, 0], 0.0), hp([1, 0], 1.0), hp([0, 1], 0.0), hp([0, 1], 1.0)]
    box = Box(np.array([-1.0, -1]), np.array([2.0, 2]))
    arr = build_arrangement(lines, box, TOL)
    frames = [PlaneFrame(*p.basis()) for p in lines]
    return lines, arr, frames


def test_betti_2d_exact_matches_cubical_flood_fill():
    lines, arr, frames = square_scene()
    s = lines[2].to_local(np.array([[0.0, 0.0], [1.0, 0.0]]))[:, 0]
    regions = [[] for _ in lines]
    regions[2] = [Interval(float(s.min()), float(s.max()))]
    secs = SectionSet.explicit(lines, frames, regions)
    exact = betti_2d(reconstruct_2d(arr, secs))
    grid = reconstruction_grid(arr, secs, 0.02, TOL)
    cub = cubical_betti_2d(grid.occupancy)
    assert exact.beta0 == cub.beta0
    assert exact.holes_per_component == cub.holes_per_component


def test_exact_cells_have_no_holes():
    # a cell's Voronoi skeleton is a tree, so per-cell pieces cannot enclose
    lines, arr, frames = square_scene()
    regions = [[] for _ in lines]
    for pid in range(4):
        reg = None
        for cell in arr.cells:
            for i, f in enumerate(cell.faces):
                if f.plane_id == pid:
                    reg = f.region
        regions[pid] = [Interval(reg.lo + 0.05, reg.hi - 0.05)]
    secs = SectionSet.explicit(lines, frames, regions)
    r2 = reconstruct_2d(arr, secs)
    for cell in arr.cells:
        for reg in r2.cell_regions(cell.id):
            assert reg.hole_count() == 0


def test_component_bijection_single_ball():
    ball = Shape([Ball(np.zeros(3), 1.0)])
    box = Box(np.array([-1.4] * 3), np.array([1.4] * 3))
    planes = [hp([0, 0, 1], -0.5), hp([0, 0, 1], 0.5)]
    arr = build_arrangement(planes, box, TOL)
    secs = SectionSet.from_shape(ball, planes, 0.01, TOL)
    truth = ball.contains_batch
    recon = lambda pts: in_reconstruction_batch(pts, arr, secs, TOL)
    cid = arr.locate_cell(np.zeros(3))
    ok, pt, pr = component_bijection(arr.cells[cid], arr, secs, truth, recon,
                                     0.1, TOL)
    assert ok
    assert len(pt.blocks) == 1 and len(pt.blocks[0]) == 2  # both disks joined


def test_component_bijection_detects_wrong_merge():
    # two disjoint balls stacked along z inside one wide slab: their disk
    # sections lift to the mid-plane and bridge, while the true components
    # stay separate (the slab is wider than twice the reach)
    two = Shape([Ball(np.array([0, 0, -0.7]), 0.6),
                 Ball(np.array([0.0, 0, 0.7]), 0.6)])
    box = Box(np.array([-1.5, -1.5, -2.2]), np.array([1.5, 1.5, 2.2]))
    planes = [hp([0, 0, 1], -1.1), hp([0, 0, 1], 1.1)]
    arr = build_arrangement(planes, box, TOL)
    secs = SectionSet.from_shape(two, planes, 0.005, TOL)
    truth = two.contains_batch
    recon = lambda pts: in_reconstruction_batch(pts, arr, secs, TOL)
    cid = arr.locate_cell(np.zeros(3))
    ok, pt, pr = component_bijection(arr.cells[cid], arr, secs, truth, recon,
                                     0.07, TOL)
    assert not ok
    assert len(pt.blocks) == 2 and len(pr.blocks) == 1

import math

import numpy as np
import pytest

from crosslift.arrangement import build_arrangement
from crosslift.exact import loop_area2
from crosslift.geometry import Box, Hyperplane, Interval, Tolerance
from crosslift.lifting import lift_point
from crosslift.reconstruction import (
    PlaneFrame,
    SectionSet,
    extract_mesh_3d,
    in_reconstruction,
    in_reconstruction_batch,
    reconstruct_2d,
    reconstruction_grid,
)

TOL = Tolerance.for_diameter(6.0)


def hp(n, o):
    return Hyperplane(np.asarray(n, dtype=float), float(o))


def square_scene(sections_spec):
    """Unit square from four lines inside a padded box; sections_spec maps
    plane index -> list of world intervals expressed in each line's frame."""
    lines = [hp([1, 0], 0.0), hp([1, 0], 1.0), hp([0, 1], 0.0), hp([0, 1], 1.0)]
    box = Box(np.array([-1.0, -1]), np.array([2.0, 2]))
    arr = build_arrangement(lines, box, TOL)
    frames = [PlaneFrame(*p.basis()) for p in lines]
    regions = [[] for _ in lines]
    for pid, ivs in sections_spec.items():
        regions[pid] = [Interval(a, b) for a, b in ivs]
    secs = SectionSet.explicit(lines, frames, regions)
    return arr, secs


def world_interval(plane, p_world, q_world):
    """Two world points on the line -> interval in the line's frame."""
    s = plane.to_local(np.array([p_world, q_world]))[:, 0]
    return (float(min(s)), float(max(s)))


def test_in_reconstruction_section_points_are_inside():
    lines = [hp([1, 0], 0.0), hp([1, 0], 1.0), hp([0, 1], 0.0), hp([0, 1], 1.0)]
    arr, secs = square_scene({2: [world_interval(lines[2], [0.0, 0.0], [1.0, 0.0])]})
    pts = np.stack([np.linspace(0.02, 0.98, 25), np.zeros(25)], axis=1)
    assert np.all(in_reconstruction_batch(pts, arr, secs, TOL))


def test_in_reconstruction_empty_cell_is_empty():
    arr, secs = square_scene({})
    rng = np.random.default_rng(0)
    pts = rng.uniform(-0.9, 1.9, size=(500, 2))
    assert not np.any(in_reconstruction_batch(pts, arr, secs, TOL))


def test_in_reconstruction_matches_segment_union_oracle():
    from oracles import segment_union, segment_union_membership

    lines = [hp([1, 0], 0.0), hp([1, 0], 1.0), hp([0, 1], 0.0), hp([0, 1], 1.0)]
    spec = {2: [world_interval(lines[2], [0.1, 0.0], [0.9, 0.0])],
            3: [world_interval(lines[3], [0.4, 1.0], [1.0, 1.0])]}
    arr, secs = square_scene(spec)
    starts, ends, spacing = segment_union(arr, secs, TOL, per_region=2000)

    rng = np.random.default_rng(1)
    pts = rng.uniform([-0.9, -0.9], [1.9, 1.9], size=(4000, 2))
    mine = in_reconstruction_batch(pts, arr, secs, TOL)
    oracle, dmin = segment_union_membership(pts, starts, ends, spacing)
    disagree = oracle != mine
    # disagreements must hug the reconstruction boundary (the oracle blur)
    assert np.mean(~disagree) >= 0.999
    assert np.all(np.abs(dmin[disagree] - spacing) <= 3 * spacing)


def test_reconstruct_2d_roof():
    lines = [hp([1, 0], 0.0), hp([1, 0], 1.0), hp([0, 1], 0.0), hp([0, 1], 1.0)]
    arr, secs = square_scene({2: [world_interval(lines[2], [0.0, 0.0], [1.0, 0.0])]})
    r2 = reconstruct_2d(arr, secs)
    regs = r2.global_regions()
    assert len(regs) == 1
    assert regs[0].hole_count() == 0
    # the two roofs over the full bottom edge meet at (0.5, +-0.5)
    pts = {(float(x), float(y)) for c in regs[0].outers for x, y in c}
    assert (0.5, 0.5) in pts and (0.5, -0.5) in pts
    area = sum(loop_area2(c) for c in regs[0].outers) / 2
    assert float(area) == pytest.approx(0.5)  # two 1/4 roofs


def test_reconstruct_2d_full_cover_fills_cell():
    lines = [hp([1, 0], 0.0), hp([1, 0], 1.0), hp([0, 1], 0.0), hp([0, 1], 1.0)]
    spec = {i: [world_interval(lines[i],
                               [0.0, 0.0] if i in (2,) else ([0.0, 1.0] if i == 3 else [lines[i].offset, 0.0]),
                               [1.0, 0.0] if i in (2,) else ([1.0, 1.0] if i == 3 else [lines[i].offset, 1.0]))]
            for i in range(4)}
    arr, secs = square_scene(spec)
    r2 = reconstruct_2d(arr, secs)
    # the unit square cell is fully reconstructed; roofs also grow outward
    rng = np.random.default_rng(2)
    pts = rng.uniform(0.01, 0.99, size=(300, 2))
    assert np.all(in_reconstruction_batch(pts, arr, secs, TOL))
    total = sum(sum(loop_area2(c) for c in reg.outers) / 2 +
                sum(loop_area2(h) for h in reg.holes) / 2
                for reg in r2.global_regions())
    assert float(total) == pytest.approx(2.0)  # square + 4 quarter roofs


def test_reconstruct_2d_slab_connectivity():
    # two overlapping-in-projection intervals on opposite slab edges connect
    lines = [hp([0, 1], 0.0), hp([0, 1], 1.0)]
    box = Box(np.array([-3.0, -1]), np.array([3.0, 2]))
    arr = build_arrangement(lines, box, TOL)
    frames = [PlaneFrame(*p.basis()) for p in lines]

    def iv(plane, x0, x1, y):
        s = plane.to_local(np.array([[x0, y], [x1, y]]))[:, 0]
        return Interval(float(min(s)), float(max(s)))

    regions = [[iv(lines[0], -2.0, 0.5, 0.0)], [iv(lines[1], -0.5, 2.0, 1.0)]]
    secs = SectionSet.explicit(lines, frames, regions)
    r2 = reconstruct_2d(arr, secs)
    regs = r2.global_regions()
    assert len(regs) == 1  # connected through the overlap
    mid = np.array([0.0, 0.5])
    assert in_reconstruction(mid, arr, secs, TOL)

    # disjoint projections stay disconnected
    regions = [[iv(lines[0], -2.0, -0.5, 0.0)], [iv(lines[1], 0.5, 2.0, 1.0)]]
    secs2 = SectionSet.explicit(lines, frames, regions)
    assert len(reconstruct_2d(arr, secs2).global_regions()) == 2


def test_reconstruct_2d_per_cell_pieces_inside_cell():
    lines = [hp([1, 0], 0.0), hp([1, 0], 1.0), hp([0, 1], 0.0), hp([0, 1], 1.0)]
    arr, secs = square_scene({2: [world_interval(lines[2], [0.2, 0.0], [0.8, 0.0])]})
    r2 = reconstruct_2d(arr, secs)
    for pc in r2.pieces:
        cell = arr.cells[pc.tag[0]]
        for (x, y) in pc.vertices:
            assert cell.contains(np.array([float(x), float(y)]), tol=1e-9)


def test_indicator_grid_cell_aware():
    lines = [hp([0, 0, 1], 0.0)]
    box = Box(np.array([-1.0, -1, -1]), np.array([1.0, 1, 1]))
    arr = build_arrangement(lines, box, TOL)
    frames = [PlaneFrame(*p.basis()) for p in lines]
    from crosslift.geometry import PolygonWithHoles

    disk = PolygonWithHoles(
        np.stack([0.6 * np.cos(np.linspace(0, 2 * math.pi, 48, endpoint=False)),
                  0.6 * np.sin(np.linspace(0, 2 * math.pi, 48, endpoint=False))],
                 axis=1))
    secs = SectionSet.explicit(lines, frames, [[disk]])
    grid = reconstruction_grid(arr, secs, 0.1, TOL)
    occ = grid.occupancy
    # material flows from the section both ways up to the skeleton sheets
    assert occ.any()
    centers = grid.centers()[occ.ravel()]
    assert np.max(np.abs(centers[:, 2])) > 0.3


def test_extract_mesh_closed_manifold():
    lines = [hp([0, 0, 1], 0.0)]
    box = Box(np.array([-1.0, -1, -1]), np.array([1.0, 1, 1]))
    arr = build_arrangement(lines, box, TOL)
    frames = [PlaneFrame(*p.basis()) for p in lines]
    from crosslift.geometry import PolygonWithHoles

    th = np.linspace(0, 2 * math.pi, 48, endpoint=False)
    disk = PolygonWithHoles(np.stack([0.6 * np.cos(th), 0.6 * np.sin(th)], axis=1))
    secs = SectionSet.explicit(lines, frames, [[disk]])
    mesh = extract_mesh_3d(arr, secs, 0.1, TOL)
    assert len(mesh.triangles) > 0
    assert mesh.is_closed_manifold()
    assert len(mesh.cell_tags) == len(mesh.triangles)


def test_empty_scene_empty_mesh():
    lines = [hp([0, 0, 1], 0.0)]
    box = Box(np.array([-1.0, -1, -1]), np.array([1.0, 1, 1]))
    arr = build_arrangement(lines, box, TOL)
    frames = [PlaneFrame(*p.basis()) for p in lines]
    secs = SectionSet.explicit(lines, frames, [[]])
    mesh = extract_mesh_3d(arr, secs, 0.15, TOL)
    assert len(mesh.triangles) == 0

"""Topology measurement and comparison: exact 2D invariants, cubical Betti
numbers on voxel grids, and the per-cell section-connectivity comparison.

Homotopy equivalence is verified at Betti-number granularity (plus exact 2D
homeomorphism type: component count and per-component hole counts).  Voxel
complexes use 6-connectivity for the solid and 26-connectivity for the
complement, which avoids the digital-topology paradox; beta1 comes from the
Euler characteristic rather than an explicit cycle basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .arrangement import BBOX_ID, Arrangement, Cell
from .geometry import Box, GeometryError, Interval, Tolerance
from .reconstruction import IndicatorGrid, SectionSet


@dataclass(frozen=True)
class TopologySummary:
    beta0: int
    beta1: int
    beta2: int = 0
    holes_per_component: tuple = ()
    euler: int = 0

    @property
    def betti(self) -> tuple[int, int, int]:
        return (self.beta0, self.beta1, self.beta2)


@dataclass(frozen=True)
class ConnectivityPartition:
    """Partition of a cell's section ids into connectivity classes."""

    blocks: tuple[tuple, ...]

    @staticmethod
    def from_blocks(blocks) -> "ConnectivityPartition":
        canon = tuple(sorted(tuple(sorted(b)) for b in blocks if b))
        return ConnectivityPartition(blocks=canon)

    def __eq__(self, other):
        return isinstance(other, ConnectivityPartition) and self.blocks == other.blocks


# ---------------------------------------------------------------------------
# exact 2D topology


def betti_2d(recon2d) -> TopologySummary:
    """Component and per-component hole counts of the exact 2D output."""
    regions = recon2d.global_regions()
    holes = tuple(sorted(r.hole_count() for r in regions))
    b0 = len(regions)
    b1 = sum(holes)
    return TopologySummary(beta0=b0, beta1=b1, beta2=0,
                           holes_per_component=holes, euler=b0 - b1)


# ---------------------------------------------------------------------------
# cubical topology


_STRUCT6 = ndimage.generate_binary_structure(3, 1)
_STRUCT26 = np.ones((3, 3, 3), dtype=bool)


def _euler_characteristic_3d(occ: np.ndarray) -> int:
    """Euler characteristic of the union of closed voxels: V - E + F - C.

    A vertex/edge/face of the cubical lattice belongs to the complex iff at
    least one of its incident voxels is occupied; counted with shifted ORs.
    """
    pp = np.pad(occ, ((1, 1), (1, 1), (1, 1)), constant_values=False)
    nx, ny, nz = occ.shape

    def orshift(deltas):
        out = np.zeros((nx + 1, ny + 1, nz + 1), dtype=bool)
        for dx, dy, dz in deltas:
            out |= pp[dx:dx + nx + 1, dy:dy + ny + 1, dz:dz + nz + 1]
        return out

    verts = orshift([(dx, dy, dz) for dx in (0, 1) for dy in (0, 1) for dz in (0, 1)])
    ex = orshift([(1, dy, dz) for dy in (0, 1) for dz in (0, 1)])[:-1, :, :]
    ey = orshift([(dx, 1, dz) for dx in (0, 1) for dz in (0, 1)])[:, :-1, :]
    ez = orshift([(dx, dy, 1) for dx in (0, 1) for dy in (0, 1)])[:, :, :-1]
    fxy = orshift([(1, 1, dz) for dz in (0, 1)])[:-1, :-1, :]
    fxz = orshift([(1, dy, 1) for dy in (0, 1)])[:-1, :, :-1]
    fyz = orshift([(dx, 1, 1) for dx in (0, 1)])[:, :-1, :-1]

    v = int(verts.sum())
    e = int(ex.sum() + ey.sum() + ez.sum())
    f = int(fxy.sum() + fxz.sum() + fyz.sum())
    c = int(occ.sum())
    return v - e + f - c


def cubical_betti_3d(grid: IndicatorGrid | np.ndarray,
                     min_feature: float | None = None,
                     force: bool = False) -> TopologySummary:
    """(beta0, beta1, beta2) of the occupied voxel complex.

    beta0 by 6-connected labeling, beta2 as bounded 26-connected complement
    components, beta1 = beta0 + beta2 - euler.
    """
    occ = grid.occupancy if isinstance(grid, IndicatorGrid) else np.asarray(grid)
    if occ.ndim != 3:
        raise GeometryError("cubical_betti_3d expects a 3D grid")
    if isinstance(grid, IndicatorGrid) and min_feature is not None and not force:
        if grid.h > min_feature / 4:
            raise GeometryError(
                f"grid too coarse for reliable topology (h={grid.h:g}, "
                f"feature={min_feature:g}); pass force=True to override")
    if not occ.any():
        return TopologySummary(0, 0, 0, (), 0)

    _, b0 = ndimage.label(occ, structure=_STRUCT6)
    comp = np.pad(~occ, 1, constant_values=True)
    lab, ncomp = ndimage.label(comp, structure=_STRUCT26)
    border_labels = set(np.unique(lab[0, :, :])) | set(np.unique(lab[-1, :, :])) \
        | set(np.unique(lab[:, 0, :])) | set(np.unique(lab[:, -1, :])) \
        | set(np.unique(lab[:, :, 0])) | set(np.unique(lab[:, :, -1]))
    border_labels.discard(0)
    b2 = int(ncomp - len(border_labels))
    chi = _euler_characteristic_3d(occ)
    b1 = b0 + b2 - chi
    if b1 < 0:
        raise GeometryError("inconsistent cubical counts (grid too coarse?)")
    return TopologySummary(int(b0), int(b1), int(b2), (), chi)


def cubical_betti_2d(occ: np.ndarray) -> TopologySummary:
    """(beta0, holes) of a 2D occupancy grid: 4-connected solid,
    8-connected complement."""
    occ = np.asarray(occ, dtype=bool)
    if not occ.any():
        return TopologySummary(0, 0, 0, (), 0)
    s4 = ndimage.generate_binary_structure(2, 1)
    s8 = np.ones((3, 3), dtype=bool)
    lab_s, b0 = ndimage.label(occ, structure=s4)
    comp = np.pad(~occ, 1, constant_values=True)
    lab, ncomp = ndimage.label(comp, structure=s8)
    border = set(np.unique(lab[0, :])) | set(np.unique(lab[-1, :])) \
        | set(np.unique(lab[:, 0])) | set(np.unique(lab[:, -1]))
    border.discard(0)
    bounded = [t for t in range(1, ncomp + 1) if t not in border]
    b1 = len(bounded)
    holes = [0] * b0
    for t in bounded:
        ring = ndimage.binary_dilation(lab == t, structure=s8)[1:-1, 1:-1]
        owners = set(np.unique(lab_s[ring & occ])) - {0}
        # a bounded complement component surrounded by one solid component
        # is one of its holes
        if len(owners) == 1:
            holes[owners.pop() - 1] += 1
        elif owners:
            holes[min(owners) - 1] += 1
    return TopologySummary(int(b0), b1, 0, tuple(sorted(holes)), int(b0) - b1)


# ---------------------------------------------------------------------------
# per-cell section connectivity


def _cell_grid(cell: Cell, h: float):
    lo = cell.vertices.min(axis=0) - h
    hi = cell.vertices.max(axis=0) + h
    counts = [max(2, int(math.ceil((hi[k] - lo[k]) / h))) for k in range(len(lo))]
    axes = [lo[k] + h * (np.arange(counts[k]) + 0.5) for k in range(len(lo))]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    inside = np.min(cell.slacks(pts), axis=0) >= 0
    return lo, counts, pts, inside.reshape(counts)


def _section_probe_points(sections: SectionSet, cell: Cell, pid: int, k: int,
                          row: int, h: float, tol: Tolerance) -> np.ndarray:
    """Points of a section pushed slightly into the cell, for label probing.

    The sampling window is the intersection of the section bbox with the
    cell's plane-local footprint, so far-away cells cost nothing."""
    reg = sections.regions[pid][k]
    frame = sections.frames[pid]
    cell_loc = frame.to_local(cell.vertices)
    clo = cell_loc.min(axis=0) - h
    chi = cell_loc.max(axis=0) + h
    if isinstance(reg, Interval):
        lo1, hi1 = max(reg.lo, float(clo[0])), min(reg.hi, float(chi[0]))
        if hi1 <= lo1:
            return np.zeros((0, cell.dim))
        n = max(3, int(math.ceil((hi1 - lo1) / h)) + 1)
        loc = np.linspace(lo1, hi1, n)[:, None]
        world = frame.to_world(loc)
    else:
        lo, hi = reg.bbox()
        lo = np.maximum(lo, clo)
        hi = np.minimum(hi, chi)
        if np.any(hi <= lo):
            return np.zeros((0, cell.dim))
        n1 = max(3, int(math.ceil((hi[0] - lo[0]) / h)) + 1)
        n2 = max(3, int(math.ceil((hi[1] - lo[1]) / h)) + 1)
        g1, g2 = np.meshgrid(np.linspace(lo[0], hi[0], n1),
                             np.linspace(lo[1], hi[1], n2), indexing="ij")
        loc = np.stack([g1.ravel(), g2.ravel()], axis=1)
        keep = reg.contains_batch(loc, tol) > 0
        loc = loc[keep]
        world = frame.to_world(loc)
    if len(world) == 0:
        return world
    inward = -cell.normals[row]
    world = world + 0.5 * h * inward
    # keep only probes strictly inside this cell: the section spans the
    # whole cutting plane, but only its part on this cell's face counts
    keep = np.min(cell.slacks(world), axis=0) >= 0
    return world[keep]


def section_touch_labels(cell: Cell, arr: Arrangement, sections: SectionSet,
                         oracle, section_rows: list, h: float,
                         tol: Tolerance) -> dict:
    """Oracle component labels touching each of the cell's sections."""
    lo, counts, pts, inside = _cell_grid(cell, h)
    occ = np.zeros(len(pts), dtype=bool)
    m = inside.ravel()
    if np.any(m):
        occ[m] = oracle(pts[m])
    occ = occ.reshape(counts)
    struct = ndimage.generate_binary_structure(len(counts), 1)
    lab, _ = ndimage.label(occ, structure=struct)

    labels_of = {}
    for (pid, k, row) in section_rows:
        probes = _section_probe_points(sections, cell, pid, k, row, h, tol)
        found = set()
        for p in probes:
            idx = np.floor((p - lo) / h).astype(int)
            if np.any(idx < 0) or np.any(idx >= np.array(counts)):
                continue
            for delta in _probe_offsets(len(counts)):
                j = idx + delta
                if np.any(j < 0) or np.any(j >= np.array(counts)):
                    continue
                v = lab[tuple(j)]
                if v != 0:
                    found.add(int(v))
                    break
        labels_of[(pid, k)] = found
    return labels_of


def group_by_labels(labels_of: dict) -> list[list]:
    """Union sections sharing an oracle component; empty-label sections
    become singletons."""
    parent: dict = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for sid, labs in labels_of.items():
        for lb in labs:
            a, b = find(("s", sid)), find(("l", lb))
            if a != b:
                parent[a] = b
    groups: dict = {}
    for sid in labels_of:
        groups.setdefault(find(("s", sid)), []).append(sid)
    return list(groups.values())


def cell_section_components(cell: Cell, arr: Arrangement, sections: SectionSet,
                            oracle, section_rows: list, h: float,
                            tol: Tolerance, strict: bool = True) -> list[list]:
    """Group a cell's sections by which oracle component touches them.

    With strict=True, a section whose probes find no occupied voxel raises
    (data inconsistency: every section must belong to its own object)."""
    labels_of = section_touch_labels(cell, arr, sections, oracle,
                                     section_rows, h, tol)
    if strict:
        for (pid, k), found in labels_of.items():
            if not found:
                raise GeometryError(
                    f"section (plane {pid}, region {k}) touched by no "
                    f"component of its oracle in cell {cell.id}")
    return group_by_labels(labels_of)


def _probe_offsets(dim):
    if dim == 2:
        order = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1),
                 (1, 1), (1, -1), (-1, 1), (-1, -1)]
    else:
        order = sorted(
            ((dx, dy, dz) for dx in (-1, 0, 1) for dy in (-1, 0, 1)
             for dz in (-1, 0, 1)),
            key=lambda d: sum(abs(v) for v in d))
    return [np.array(d) for d in order]


def component_bijection(cell: Cell, arr: Arrangement, sections: SectionSet,
                        oracle_truth, oracle_recon, resolution: float,
                        tol: Tolerance | None = None):
    """Do the truth and the reconstruction induce the same connectivity
    classes on the cell's sections?

    Returns (equal, partition_truth, partition_recon).  Section pieces
    thinner than the grid carry no connectivity information at this
    resolution: pieces invisible to either oracle are dropped from both
    partitions (symmetrically, so the comparison stays fair).
    """
    tol = tol or arr.tol
    section_rows = []
    seen = set()
    for row, pid in enumerate(cell.plane_ids):
        if pid == BBOX_ID:
            continue
        for k in range(len(sections.regions[pid])):
            probes = _section_probe_points(sections, cell, pid, k, row,
                                           resolution, tol)
            if len(probes) and (pid, k) not in seen:
                seen.add((pid, k))
                section_rows.append((pid, k, row))
    if not section_rows:
        return True, ConnectivityPartition(()), ConnectivityPartition(())

    labels_t = section_touch_labels(cell, arr, sections, oracle_truth,
                                    section_rows, resolution, tol)
    labels_r = section_touch_labels(cell, arr, sections, oracle_recon,
                                    section_rows, resolution, tol)
    visible = {sid for sid in labels_t if labels_t[sid] and labels_r[sid]}
    part_t = ConnectivityPartition.from_blocks(
        [[s for s in b if s in visible]
         for b in group_by_labels({k: v for k, v in labels_t.items() if k in visible})])
    part_r = ConnectivityPartition.from_blocks(
        [[s for s in b if s in visible]
         for b in group_by_labels({k: v for k, v in labels_r.items() if k in visible})])
    return part_t == part_r, part_t, part_r

"""The reconstructed object: membership oracle, exact 2D polygonal output,
3D indicator grids and mesh extraction, and the convex-bodies variant.

A point is in the reconstruction iff one of its nearest points on its cell's
boundary lies in a cross-section (ties on the Voronoi skeleton count with a
logical OR, which makes the reconstruction closed).  Bounding-box walls never
carry sections.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arrangement import BBOX_ID, Arrangement, Cell
from .exact import (
    ConvexPiece,
    ExactRegion,
    components_by_intersection,
    fr,
    loop_area2,
    lower_envelope,
    snap,
    union_regions,
)
from .geometry import (
    Box,
    GeometryError,
    Hyperplane,
    Interval,
    PolygonWithHoles,
    Tolerance,
)

ON_OR_IN = 0  # sections are closed: OnBoundary counts as membership


@dataclass(eq=False)
class PlaneFrame:
    """In-plane coordinate frame a plane's sections are expressed in."""

    origin: np.ndarray
    axes: np.ndarray  # (d, d-1)

    def to_local(self, pts: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(pts) - self.origin) @ self.axes

    def to_world(self, loc: np.ndarray) -> np.ndarray:
        return self.origin + np.atleast_2d(loc) @ self.axes.T


@dataclass(eq=False)
class SectionSet:
    """All cross-sections, grouped per cutting plane.

    2D sections are intervals along the line and also carry exact rational
    endpoints (the plane-local inputs snapped to a dyadic grid), which is the
    input model for the exact 2D reconstruction.
    """

    planes: list[Hyperplane]
    frames: list[PlaneFrame]
    regions: list[list]  # per plane: PolygonWithHoles (3D) or Interval (2D)
    exact_intervals: list[list[tuple[Fraction, Fraction]]] | None = None

    @staticmethod
    def from_shape(shape, planes: list[Hyperplane], chordal_tol: float,
                   tol: Tolerance) -> "SectionSet":
        frames = [PlaneFrame(*p.basis()) for p in planes]
        regions = [shape.section_of(p, chordal_tol, tol) for p in planes]
        ss = SectionSet(planes=list(planes), frames=frames, regions=regions)
        if shape.dim == 2:
            ss._snap_intervals()
        return ss

    @staticmethod
    def explicit(planes: list[Hyperplane], frames: list[PlaneFrame],
                 regions: list[list]) -> "SectionSet":
        ss = SectionSet(planes=list(planes), frames=list(frames),
                        regions=[list(r) for r in regions])
        if planes and planes[0].dim == 2:
            ss._snap_intervals()
        return ss

    def _snap_intervals(self):
        self.exact_intervals = []
        snapped = []
        for regs in self.regions:
            ex = []
            fl = []
            for iv in regs:
                lo, hi = snap(iv.lo), snap(iv.hi)
                ex.append((lo, hi))
                fl.append(Interval(float(lo), float(hi)))
            self.exact_intervals.append(ex)
            snapped.append(fl)
        self.regions = snapped

    @property
    def dim(self) -> int:
        return self.planes[0].dim if self.planes else 0

    def membership_batch(self, plane_id: int, pts_world: np.ndarray,
                         tol: Tolerance) -> np.ndarray:
        """True where a plane point lies in some section (boundary counts)."""
        loc = self.frames[plane_id].to_local(pts_world)
        out = np.zeros(len(loc), dtype=bool)
        for reg in self.regions[plane_id]:
            if isinstance(reg, Interval):
                out |= reg.contains_batch(loc[:, 0], tol) >= ON_OR_IN
            else:
                out |= reg.contains_batch(loc, tol) >= ON_OR_IN
        return out

    def sections_on_face(self, cell: Cell, face_index: int):
        """Sections of the cutting plane supporting a face (per-cell view).

        Sections live on whole planes; the per-face restriction is by
        membership, so no clipping is performed here."""
        pid = cell.plane_ids[face_index]
        if pid == BBOX_ID:
            return []
        return [(pid, k, reg) for k, reg in enumerate(self.regions[pid])]

    def boundary_samples_3d(self, plane_id: int, spacing: float) -> np.ndarray:
        pts = []
        for reg in self.regions[plane_id]:
            if isinstance(reg, PolygonWithHoles):
                pts.append(reg.boundary_points(spacing))
        if not pts:
            return np.zeros((0, 2))
        return np.vstack(pts)


# ---------------------------------------------------------------------------
# membership oracle


def in_reconstruction(x, arr: Arrangement, sections: SectionSet,
                      tol: Tolerance | None = None) -> bool:
    tol = tol or arr.tol
    return bool(in_reconstruction_batch(np.asarray(x, dtype=float)[None, :],
                                        arr, sections, tol)[0])


def in_reconstruction_batch(points: np.ndarray, arr: Arrangement,
                            sections: SectionSet,
                            tol: Tolerance | None = None) -> np.ndarray:
    """Vectorized nearest-point membership rule."""
    tol = tol or arr.tol
    pts = np.atleast_2d(points)
    ids = arr.locate_batch(pts)
    out = np.zeros(len(pts), dtype=bool)
    for cid in np.unique(ids):
        m = ids == cid
        out[m] = _cell_membership(pts[m], arr.cells[cid], arr, sections, tol)
    return out


def _cell_membership(pts, cell: Cell, arr, sections: SectionSet, tol) -> np.ndarray:
    slack = np.maximum(cell.slacks(pts), 0.0)
    dmin = slack.min(axis=0)
    res = np.zeros(len(pts), dtype=bool)
    for row, pid in enumerate(cell.plane_ids):
        if pid == BBOX_ID:
            continue
        tied = slack[row] <= dmin + tol.eps_geom
        if not np.any(tied):
            continue
        proj = pts[tied] + slack[row][tied, None] * cell.normals[row]
        res[tied] |= sections.membership_batch(pid, proj, tol)
    return res


# ---------------------------------------------------------------------------
# exact 2D reconstruction


@dataclass(eq=False)
class Reconstruction2D:
    """Exact 2D output: convex pieces with provenance plus their unions."""

    pieces: list[ConvexPiece]
    _global_regions: list[ExactRegion] | None = field(default=None, repr=False)

    def cell_pieces(self, cell_id: int) -> list[ConvexPiece]:
        return [p for p in self.pieces if p.tag[0] == cell_id]

    def global_regions(self) -> list[ExactRegion]:
        if self._global_regions is None:
            self._global_regions = union_regions(self.pieces)
        return self._global_regions

    def cell_regions(self, cell_id: int) -> list[ExactRegion]:
        return union_regions(self.cell_pieces(cell_id))

    def piece_components(self) -> list[list[int]]:
        return components_by_intersection(self.pieces)

    def float_loops(self):
        """(outer loops, hole loops) as float arrays, for rendering."""
        outs, holes = [], []
        for reg in self.global_regions():
            outs.extend(np.array([[float(x), float(y)] for x, y in c])
                        for c in reg.outers)
            holes.extend(np.array([[float(x), float(y)] for x, y in c])
                         for c in reg.holes)
        return outs, holes


def _exact_cell_polygon(cell: Cell, bbox: Box):
    hps = [(fr(cell.normals[i][0]), fr(cell.normals[i][1]), fr(cell.offsets[i]))
           for i in range(len(cell.normals))]
    pad = fr(float(bbox.diameter()))
    cx = [fr(float(bbox.lo[0])) - pad, fr(float(bbox.hi[0])) + pad]
    cy = [fr(float(bbox.lo[1])) - pad, fr(float(bbox.hi[1])) + pad]
    seed = [(cx[0], cy[0]), (cx[1], cy[0]), (cx[1], cy[1]), (cx[0], cy[1])]
    from .exact import convex_from_halfplanes

    return hps, convex_from_halfplanes(hps, seed)


def reconstruct_2d(arr: Arrangement, sections: SectionSet) -> Reconstruction2D:
    """Per-cell exact reconstruction, assembled from convex pieces.

    Each section interval on a cell edge contributes, per linear piece of the
    lift envelope, the convex region bounded by the cell, the slab over the
    parameter range, and the dominance halfplane of the winning opposite
    face.  Their union is the reconstructed set, exactly.
    """
    if arr.dim != 2:
        raise GeometryError("reconstruct_2d needs a 2D arrangement")
    if sections.exact_intervals is None:
        raise GeometryError("sections carry no exact interval data")

    pieces: list[ConvexPiece] = []
    for cell in arr.cells:
        hps, poly = _exact_cell_polygon(cell, arr.bbox)
        if not poly:
            continue
        for row, pid in enumerate(cell.plane_ids):
            if pid == BBOX_ID:
                continue
            frame = sections.frames[pid]
            u = (fr(float(frame.axes[0, 0])), fr(float(frame.axes[1, 0])))
            ox, oy = fr(float(frame.origin[0])), fr(float(frame.origin[1]))
            s_shift = u[0] * ox + u[1] * oy

            a_i = (hps[row][0], hps[row][1])
            c_i = hps[row][2]
            # face extent in the section parameter s = u.x - u.origin
            on_face = [p for p in poly
                       if a_i[0] * p[0] + a_i[1] * p[1] == c_i]
            if len(on_face) < 2:
                continue
            svals = [u[0] * p[0] + u[1] * p[1] - s_shift for p in on_face]
            f_lo, f_hi = min(svals), max(svals)

            lines = []
            winners = []
            for g in range(len(hps)):
                if g == row:
                    continue
                a_g = (hps[g][0], hps[g][1])
                c_g = hps[g][2]
                denom = 1 - (a_g[0] * a_i[0] + a_g[1] * a_i[1])
                if denom <= 0:
                    continue
                # slack_g along the edge is affine in s
                base = c_g - (a_g[0] * ox + a_g[1] * oy)
                m_s = -(a_g[0] * u[0] + a_g[1] * u[1])
                lines.append((m_s / denom, base / denom))
                winners.append(g)
            if not lines:
                continue

            for (s0, s1) in sections.exact_intervals[pid]:
                lo = max(s0, f_lo)
                hi = min(s1, f_hi)
                if lo >= hi:
                    continue
                env = lower_envelope(lines, lo, hi, eps=0)
                for k in range(len(env) - 1):
                    sa, _, line_idx = env[k]
                    sb = env[k + 1][0]
                    if sa == sb:
                        continue
                    g = winners[line_idx]
                    a_g = (hps[g][0], hps[g][1])
                    c_g = hps[g][2]
                    piece_hps = hps + [
                        (-u[0], -u[1], -(sa + s_shift)),
                        (u[0], u[1], sb + s_shift),
                        (a_g[0] - a_i[0], a_g[1] - a_i[1], c_g - c_i),
                    ]
                    pc = ConvexPiece.build(piece_hps, poly,
                                           tag=(cell.id, row, pid))
                    if pc is not None:
                        pieces.append(pc)
    return Reconstruction2D(pieces=pieces)


# ---------------------------------------------------------------------------
# 3D indicator grid and mesh extraction


@dataclass(eq=False)
class IndicatorGrid:
    """Uniform voxelization of a membership oracle over a box.

    Voxel (i, j, k) is the cube with corners origin + h*(i, j, k) and
    origin + h*(i+1, j+1, k+1); occupancy samples the oracle at its center,
    which keeps the indicator cell-aware (each center is classified in its
    own arrangement cell, so nothing smears across cutting planes).
    """

    origin: np.ndarray
    h: float
    occupancy: np.ndarray  # bool, shape (nx, ny, nz) or (nx, ny)

    @staticmethod
    def sample(fn, bbox: Box, h: float, chunk: int = 200000) -> "IndicatorGrid":
        dim = bbox.dim
        counts = [max(2, int(math.ceil((bbox.hi[k] - bbox.lo[k]) / h)))
                  for k in range(dim)]
        axes = [bbox.lo[k] + h * (np.arange(counts[k]) + 0.5) for k in range(dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        occ = np.empty(len(pts), dtype=bool)
        for s in range(0, len(pts), chunk):
            occ[s:s + chunk] = fn(pts[s:s + chunk])
        return IndicatorGrid(origin=bbox.lo.copy(), h=float(h),
                             occupancy=occ.reshape(counts))

    def centers(self) -> np.ndarray:
        dim = self.occupancy.ndim
        axes = [self.origin[k] + self.h * (np.arange(self.occupancy.shape[k]) + 0.5)
                for k in range(dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


def reconstruction_grid(arr: Arrangement, sections: SectionSet, h: float,
                        tol: Tolerance | None = None,
                        bbox: Box | None = None) -> IndicatorGrid:
    box = bbox or arr.bbox
    return IndicatorGrid.sample(
        lambda pts: in_reconstruction_batch(pts, arr, sections, tol), box, h)


@dataclass(eq=False)
class Mesh3D:
    vertices: np.ndarray  # (n, 3)
    triangles: np.ndarray  # (m, 3) int
    cell_tags: np.ndarray  # (m,) arrangement cell id per triangle

    def is_closed_manifold(self) -> bool:
        edges = {}
        for t in self.triangles:
            for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
                key = (min(a, b), max(a, b))
                edges[key] = edges.get(key, 0) + 1
        return all(v == 2 for v in edges.values())


_QUAD_CORNERS = {
    # axis, direction -> the 4 voxel-corner offsets of the exposed face,
    # ordered CCW as seen from outside (the +dir side)
    (0, +1): [(1, 0, 0), (1, 1, 0), (1, 1, 1), (1, 0, 1)],
    (0, -1): [(0, 0, 0), (0, 0, 1), (0, 1, 1), (0, 1, 0)],
    (1, +1): [(0, 1, 0), (0, 1, 1), (1, 1, 1), (1, 1, 0)],
    (1, -1): [(0, 0, 0), (1, 0, 0), (1, 0, 1), (0, 0, 1)],
    (2, +1): [(0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)],
    (2, -1): [(0, 0, 0), (0, 1, 0), (1, 1, 0), (1, 0, 0)],
}


def extract_mesh_3d(arr: Arrangement, sections: SectionSet, resolution: float,
                    tol: Tolerance | None = None,
                    min_feature: float | None = None,
                    grid: IndicatorGrid | None = None) -> Mesh3D:
    """Closed oriented manifold mesh of the reconstruction boundary.

    The surface is the boundary of the occupied voxels of the indicator
    grid; vertices at pinch configurations are split so the result is
    manifold (topology is always measured on the grid itself, never on this
    mesh).
    """
    if min_feature is not None and resolution > min_feature / 4:
        warnings.warn("mesh resolution coarser than a quarter of the smallest "
                      "feature; surface detail may be lost")
    if grid is None:
        grid = reconstruction_grid(arr, sections, resolution, tol)
    occ = grid.occupancy
    if not occ.any():
        return Mesh3D(np.zeros((0, 3)), np.zeros((0, 3), dtype=int),
                      np.zeros(0, dtype=int))

    quads = []  # (corner keys x4, solid voxel index)
    solids = np.argwhere(occ)
    occ_pad = np.pad(occ, 1, constant_values=False)
    for axis in range(3):
        for dr in (+1, -1):
            nb = np.roll(occ_pad, -dr, axis=axis)[1:-1, 1:-1, 1:-1]
            exposed = occ & ~nb
            for idx in np.argwhere(exposed):
                corners = [tuple(idx + np.array(c))
                           for c in _QUAD_CORNERS[(axis, dr)]]
                quads.append((corners, tuple(idx)))

    # pair quads around shared edges; 4-quad edges pair by shared solid voxel
    edge_faces: dict = {}
    for qi, (corners, solid) in enumerate(quads):
        for k in range(4):
            a, b = corners[k], corners[(k + 1) % 4]
            key = (a, b) if a < b else (b, a)
            edge_faces.setdefault(key, []).append(qi)

    def paired(edge, qi):
        lst = edge_faces[edge]
        if len(lst) == 2:
            return lst[0] if lst[1] == qi else lst[1]
        same = [q for q in lst if q != qi and quads[q][1] == quads[qi][1]]
        return same[0]

    # split vertices: one output vertex per (corner, face-fan component)
    corner_faces: dict = {}
    for qi, (corners, _) in enumerate(quads):
        for c in corners:
            corner_faces.setdefault(c, []).append(qi)

    vert_id: dict = {}
    verts: list = []
    for c, faces in corner_faces.items():
        remaining = set(faces)
        while remaining:
            comp = set()
            stack = [next(iter(remaining))]
            while stack:
                q = stack.pop()
                if q in comp:
                    continue
                comp.add(q)
                corners, _ = quads[q]
                for k in range(4):
                    a, b = corners[k], corners[(k + 1) % 4]
                    if c not in (a, b):
                        continue
                    key = (a, b) if a < b else (b, a)
                    p = paired(key, q)
                    if p in remaining and p not in comp:
                        stack.append(p)
            remaining -= comp
            vid = len(verts)
            verts.append(grid.origin + grid.h * np.array(c, dtype=float))
            for q in comp:
                vert_id[(c, q)] = vid

    cell_of_solid = {}
    tris = []
    tags = []
    for qi, (corners, solid) in enumerate(quads):
        if solid not in cell_of_solid:
            center = grid.origin + grid.h * (np.array(solid) + 0.5)
            cell_of_solid[solid] = arr.locate_cell(center) if arr is not None else -1
        ids = [vert_id[(c, qi)] for c in corners]
        tris.append([ids[0], ids[1], ids[2]])
        tris.append([ids[0], ids[2], ids[3]])
        tags.extend([cell_of_solid[solid]] * 2)

    mesh = Mesh3D(vertices=np.array(verts),
                  triangles=np.array(tris, dtype=int),
                  cell_tags=np.array(tags, dtype=int))
    if not mesh.is_closed_manifold():
        raise GeometryError("mesh extraction produced a non-manifold surface")
    return mesh


# ---------------------------------------------------------------------------
# convex-bodies variant


@dataclass(eq=False)
class ConvexClassHull:
    cell_id: int
    section_ids: list  # (plane_id, region_index)
    points: np.ndarray  # the sections' polygon points in world coordinates
    normals: np.ndarray | None  # hull halfspaces (None for flat classes)
    offsets: np.ndarray | None

    def contains_batch(self, pts: np.ndarray, eps: float) -> np.ndarray:
        pts = np.atleast_2d(pts)
        if self.normals is None:
            # flat class: a single section; membership is by distance to
            # the section's plane polygon, handled by the caller
            return np.zeros(len(pts), dtype=bool)
        return np.all(pts @ self.normals.T <= self.offsets + eps, axis=1)


def _section_world_points(sections: SectionSet, pid: int, k: int,
                          spacing: float, cell: Cell | None = None,
                          tol: Tolerance | None = None) -> np.ndarray:
    """Sampled points of a section, optionally restricted to a cell.

    Sections are stored per plane; the per-cell view is the membership
    restriction, so the hull input is the sampled in-cell portion."""
    reg = sections.regions[pid][k]
    frame = sections.frames[pid]
    if isinstance(reg, Interval):
        n = max(2, int(math.ceil(reg.length() / spacing)) + 1)
        loc = np.linspace(reg.lo, reg.hi, n)[:, None]
        world = frame.to_world(loc)
    else:
        loc = np.vstack([np.vstack(list(reg.loops())), reg.boundary_points(spacing)])
        world = frame.to_world(loc)
    if cell is not None:
        eps = (tol.eps_geom if tol is not None else 0.0)
        keep = np.min(cell.slacks(world), axis=0) >= -eps
        world = world[keep]
    return world


def reconstruct_convex_mode(arr: Arrangement, sections: SectionSet,
                            resolution: float,
                            tol: Tolerance | None = None):
    """Convex-hull reconstruction for shapes promised to be disjoint unions
    of convex bodies: per cell, hull of each section connectivity class.

    Classes are found by flood-filling the membership oracle on a per-cell
    grid and grouping sections touched by the same component.
    """
    from .topology import cell_section_components

    tol = tol or arr.tol
    hulls: list[ConvexClassHull] = []
    for cell in arr.cells:
        cell_secs = []
        for row, pid in enumerate(cell.plane_ids):
            if pid == BBOX_ID:
                continue
            for (p, k, reg) in sections.sections_on_face(cell, row):
                if (p, k) not in [(a, b) for (a, b, _, _) in cell_secs]:
                    cell_secs.append((p, k, reg, row))
        if not cell_secs:
            continue
        groups = cell_section_components(
            cell, arr, sections,
            lambda pts: in_reconstruction_batch(pts, arr, sections, tol),
            [(p, k, row) for (p, k, _, row) in cell_secs], resolution, tol,
            strict=False)
        for members in groups:
            if not members:
                continue
            chunks = [c for c in (
                _section_world_points(sections, p, k, resolution, cell, tol)
                for (p, k) in members) if len(c)]
            if not chunks:
                continue  # class invisible on this cell at this resolution
            pts = np.vstack(chunks)
            hull = _make_hull(cell, pts, tol)
            hulls.append(ConvexClassHull(cell_id=cell.id,
                                         section_ids=list(members),
                                         points=pts,
                                         normals=hull[0], offsets=hull[1]))
    return hulls


def _make_hull(cell: Cell, pts: np.ndarray, tol: Tolerance):
    from scipy.spatial import ConvexHull, QhullError

    try:
        hull = ConvexHull(pts)
    except QhullError:
        return None, None  # flat class (single section)
    normals = hull.equations[:, :-1]
    offsets = -hull.equations[:, -1]
    slack = float(np.max(cell.normals @ pts.T - cell.offsets[:, None]))
    if slack > 100 * tol.eps_geom:
        raise AssertionError("convex class hull escapes its cell")
    return normals, offsets


def convex_mode_components(hulls: list[ConvexClassHull]) -> int:
    """Global component count: hulls in adjacent cells join through the
    sections they share."""
    parent = list(range(len(hulls)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    by_section: dict = {}
    for i, h in enumerate(hulls):
        for sid in h.section_ids:
            by_section.setdefault(tuple(sid), []).append(i)
    for members in by_section.values():
        for j in members[1:]:
            if find(members[0]) != find(j):
                parent[find(j)] = find(members[0])
    return len({find(i) for i in range(len(hulls))})

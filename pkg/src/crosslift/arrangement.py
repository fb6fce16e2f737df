"""Arrangement of cutting hyperplanes: convex cells, nearest-face queries,
and the per-cell height (inscribed-ball radius w.r.t. the cutting planes).

Cells are built by incremental splitting of the bounding box, so only the
nonempty sign patterns are ever materialized.  Every cell stores its
irredundant outward halfspaces (A x <= b with unit rows) together with one
face per row; faces contributed by the bounding box carry plane_id="bbox"
and never hold cross-section data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import HalfspaceIntersection

from .geometry import (
    Box,
    GeometryError,
    Hyperplane,
    Interval,
    PolygonWithHoles,
    Tolerance,
    as_point,
)

BBOX_ID = "bbox"


def chebyshev_center(normals: np.ndarray, offsets: np.ndarray):
    """Largest inscribed ball of {x : A x <= b} with unit rows.

    Returns (center, radius); radius is +inf when the LP is unbounded.
    Raises GeometryError when the solver fails outright.
    """
    m, d = normals.shape
    c = np.zeros(d + 1)
    c[-1] = -1.0
    A_ub = np.hstack([normals, np.ones((m, 1))])
    bounds = [(None, None)] * d + [(0, None)]
    res = linprog(c, A_ub=A_ub, b_ub=offsets, bounds=bounds, method="highs")
    if res.status == 3:
        return None, math.inf
    if not res.success:
        raise GeometryError(f"Chebyshev LP failed: {res.message}")
    return res.x[:d], float(res.x[d])


def _clip_polygon(pts: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Keep the normal.x <= offset side of a convex 2D loop (float)."""
    out = []
    vals = pts @ normal - offset
    n = len(pts)
    for i in range(n):
        p, q = pts[i], pts[(i + 1) % n]
        vp, vq = vals[i], vals[(i + 1) % n]
        if vp <= 0:
            out.append(p)
        if (vp < 0 < vq) or (vq < 0 < vp):
            t = vp / (vp - vq)
            out.append(p + t * (q - p))
    return np.array(out) if out else np.zeros((0, pts.shape[1]))


def _axis_aligned_box(normals, offsets, tol):
    """Per-axis [lo, hi] when every row is +-e_k, else None."""
    d = normals.shape[1]
    lo = np.full(d, -np.inf)
    hi = np.full(d, np.inf)
    for row in range(len(normals)):
        n = normals[row]
        k = int(np.argmax(np.abs(n)))
        if abs(abs(n[k]) - 1.0) > 1e-12 or np.sum(np.abs(n)) > 1.0 + 1e-12:
            return None
        if n[k] > 0:
            hi[k] = min(hi[k], offsets[row])
        else:
            lo[k] = max(lo[k], -offsets[row])
    return lo, hi


def _cell_vrep(normals, offsets, interior_hint, tol):
    """(vertices, interior point) of {A x <= b}.

    Axis-aligned cells are boxes and need no hint; general cells go through
    qhull seeded at the hint, falling back to the Chebyshev center."""
    box = _axis_aligned_box(normals, offsets, tol)
    if box is not None and np.all(np.isfinite(box[0])) and np.all(np.isfinite(box[1])):
        lo, hi = box
        if np.any(hi - lo <= 2 * tol):
            return np.zeros((0, normals.shape[1])), None
        verts = np.array(np.meshgrid(*zip(lo, hi), indexing="ij"))
        return verts.reshape(normals.shape[1], -1).T, 0.5 * (lo + hi)
    center = interior_hint
    if center is None or np.min(offsets - normals @ center) <= 0:
        center, r = chebyshev_center(normals, offsets)
        if center is None or r <= tol:
            return np.zeros((0, normals.shape[1])), None
    try:
        return _vertices_from_halfspaces(normals, offsets, center, tol), center
    except GeometryError:
        center, r = chebyshev_center(normals, offsets)
        if center is None or r <= tol:
            return np.zeros((0, normals.shape[1])), None
        return _vertices_from_halfspaces(normals, offsets, center, tol), center


def _vertices_from_halfspaces(normals, offsets, interior, tol):
    """Vertex set of {A x <= b}; axis-aligned boxes directly, 2D by
    clipping, 3D via qhull."""
    d = normals.shape[1]
    box = _axis_aligned_box(normals, offsets, tol)
    if box is not None and np.all(np.isfinite(box[0])) and np.all(np.isfinite(box[1])):
        lo, hi = box
        if np.any(hi - lo <= 0):
            return np.zeros((0, d))
        return np.array(np.meshgrid(*zip(lo, hi), indexing="ij")).reshape(d, -1).T
    if d == 2:
        span = 10.0 * (np.max(np.abs(offsets)) + 1.0)
        pts = np.array([[-span, -span], [span, -span], [span, span], [-span, span]])
        for nrm, off in zip(normals, offsets):
            pts = _clip_polygon(pts, nrm, off)
            if len(pts) == 0:
                return pts
        return pts
    hs = np.hstack([normals, -offsets[:, None]])
    try:
        hi = HalfspaceIntersection(hs, interior)
    except Exception as e:  # qhull can reject nearly-degenerate cells
        raise GeometryError(f"cell vertex enumeration failed: {e}") from e
    verts = hi.intersections
    # dedupe within tolerance
    key = np.round(verts / max(tol, 1e-13)).astype(np.int64)
    _, idx = np.unique(key, axis=0, return_index=True)
    return verts[np.sort(idx)]


@dataclass(eq=False)
class Face:
    """One facet of a cell, with its geometry in plane-local coordinates.

    The local region (polygon, or interval in 2D) is built lazily from the
    facet's vertices; most faces are never queried."""

    plane: Hyperplane  # oriented outward from the cell
    plane_id: int | str  # index into the scene's cutting planes, or "bbox"
    points: np.ndarray  # cell vertices lying on this facet
    _region: PolygonWithHoles | Interval | None = None

    @property
    def is_bbox(self) -> bool:
        return self.plane_id == BBOX_ID

    @property
    def region(self) -> PolygonWithHoles | Interval:
        if self._region is None:
            local = self.plane.to_local(self.points)
            if self.plane.dim == 2:
                self._region = Interval(float(local.min()), float(local.max()))
            else:
                centroid = local.mean(axis=0)
                ang = np.arctan2(local[:, 1] - centroid[1],
                                 local[:, 0] - centroid[0])
                self._region = PolygonWithHoles(local[np.argsort(ang)])
        return self._region


@dataclass(eq=False)
class Cell:
    id: int
    normals: np.ndarray  # (k, d) outward unit normals; cell = {A x <= b}
    offsets: np.ndarray  # (k,)
    faces: list[Face]
    plane_ids: list
    sign_vector: tuple[bool, ...]
    vertices: np.ndarray
    interior_point: np.ndarray
    inradius: float

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    def slacks(self, points: np.ndarray) -> np.ndarray:
        """b - A x per constraint, shape (k, m); min over rows is the
        distance to the boundary for interior points (cell convexity)."""
        pts = np.atleast_2d(points)
        return self.offsets[:, None] - self.normals @ pts.T

    def contains(self, x, tol: float = 0.0) -> bool:
        return bool(np.min(self.slacks(np.asarray(x, dtype=float))) >= -tol)

    def diameter(self) -> float:
        v = self.vertices
        if len(v) == 0:
            return 0.0
        d = 0.0
        for i in range(len(v)):
            d = max(d, float(np.max(np.linalg.norm(v - v[i], axis=1))))
        return d

    @property
    def bounded(self) -> bool:
        """Bounded by cutting planes alone (no bbox wall supports a facet)."""
        return all(not f.is_bbox for f in self.faces)


@dataclass(eq=False)
class NearestFaces:
    """Result of a nearest-face query: all ties within tolerance."""

    face_indices: list[int]
    points: np.ndarray  # (t, d) projections onto each tied face
    distance: float


@dataclass(eq=False)
class Arrangement:
    planes: list[Hyperplane]
    bbox: Box
    cells: list[Cell]
    tol: Tolerance
    _sign_index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._sign_index = {c.sign_vector: c.id for c in self.cells}

    @property
    def dim(self) -> int:
        return self.bbox.dim

    def locate_cell(self, x) -> int:
        x = as_point(x, self.dim)
        if not self.bbox.contains(x, slack=self.tol.eps_geom):
            raise GeometryError("point outside the bounding box")
        return int(self.locate_batch(x[None, :])[0])

    def locate_batch(self, points: np.ndarray) -> np.ndarray:
        """Cell id per point; points within eps of a plane go to the
        positive side (deterministic tie rule)."""
        pts = np.atleast_2d(points)
        if self.planes:
            nrm = np.stack([p.normal for p in self.planes])
            off = np.array([p.offset for p in self.planes])
            signs = (pts @ nrm.T - off) >= -self.tol.eps_geom
        else:
            signs = np.zeros((len(pts), 0), dtype=bool)
        out = np.empty(len(pts), dtype=np.int64)
        for i, row in enumerate(signs):
            key = tuple(bool(v) for v in row)
            cid = self._sign_index.get(key)
            if cid is None:
                # tie rule put the point on an empty sign pattern; fall back
                # to the cell that actually contains it
                cid = self._locate_slow(pts[i])
            out[i] = cid
        return out

    def _locate_slow(self, x) -> int:
        best, best_slack = None, -math.inf
        for c in self.cells:
            s = float(np.min(c.slacks(x)))
            if s > best_slack:
                best, best_slack = c.id, s
        if best is None or best_slack < -10 * self.tol.eps_geom:
            raise GeometryError("point not located in any cell")
        return best


def build_arrangement(planes: list[Hyperplane], bbox: Box,
                      tol: Tolerance | None = None) -> Arrangement:
    """Subdivide the bbox into the convex cells induced by the planes."""
    tol = tol or Tolerance.for_diameter(bbox.diameter())
    d = bbox.dim
    for p in planes:
        if p.dim != d:
            raise GeometryError("plane dimension does not match bbox")
    for i in range(len(planes)):
        for j in range(i + 1, len(planes)):
            ni, nj = planes[i].normal, planes[j].normal
            dot = float(ni @ nj)
            if abs(dot) >= 1.0 - tol.eps_angle:
                oi, oj = planes[i].offset, math.copysign(1.0, dot) * planes[j].offset
                if abs(oi - oj) <= tol.eps_geom:
                    raise GeometryError(f"duplicate cutting planes {i} and {j}")

    walls = bbox.walls()
    base_normals = np.stack([w.normal for w in walls])
    base_offsets = np.array([w.offset for w in walls])
    base_ids: list = [BBOX_ID] * len(walls)
    d = bbox.dim

    # raw cell geometry: ("box", lo, hi) for axis-aligned cells, otherwise
    # ("verts", vertex array, interior point); boxes split with no numpy
    cells_raw = [(base_normals, base_offsets, base_ids, (),
                  ("box", [float(v) for v in bbox.lo], [float(v) for v in bbox.hi]))]
    split_eps = max(tol.eps_geom, 1e-9 * bbox.diameter())
    for pi, plane in enumerate(planes):
        axis = _plane_axis(plane)
        nxt = []
        for normals, offsets, ids, signs, geom in cells_raw:
            if geom[0] == "box" and axis is not None:
                k, sgn_ax = axis
                blo, bhi = geom[1], geom[2]
                x_plane = plane.offset * sgn_ax  # plane coordinate on axis k
                lo = blo[k] - x_plane
                hi = bhi[k] - x_plane
                if sgn_ax < 0:
                    lo, hi = -hi, -lo
                if not (lo < -split_eps and hi > split_eps):
                    nxt.append((normals, offsets, ids, signs + (hi > -lo,), geom))
                    continue
                for positive in (True, False):
                    s = -1.0 if positive else 1.0
                    n2 = np.vstack([normals, s * plane.normal])
                    o2 = np.append(offsets, s * plane.offset)
                    clo, chi = list(blo), list(bhi)
                    if (sgn_ax > 0) == positive:
                        clo[k] = x_plane  # the x_k >= x_plane side
                    else:
                        chi[k] = x_plane
                    nxt.append((n2, o2, ids + [pi], signs + (positive,),
                                ("box", clo, chi)))
                continue

            verts, interior = _materialize(geom)
            vals = verts @ plane.normal - plane.offset
            lo, hi = float(vals.min()), float(vals.max())
            if not (lo < -split_eps and hi > split_eps):
                nxt.append((normals, offsets, ids, signs + (hi > -lo,), geom))
                continue
            val0 = float(plane.normal @ interior - plane.offset)
            children = []
            for positive in (True, False):
                s = -1.0 if positive else 1.0
                n2 = np.vstack([normals, s * plane.normal])
                o2 = np.append(offsets, s * plane.offset)
                hint = _child_interior(interior, val0, verts, vals, positive)
                v2, center = _cell_vrep(n2, o2, hint, tol.eps_geom)
                if center is None or len(v2) < normals.shape[1] + 1:
                    children = None
                    break
                children.append((n2, o2, ids + [pi], signs + (positive,),
                                 ("verts", v2, center)))
            if children is None:
                nxt.append((normals, offsets, ids, signs + (hi > -lo,), geom))
            else:
                nxt.extend(children)
        cells_raw = nxt

    cells = []
    for cid, (normals, offsets, ids, signs, geom) in enumerate(cells_raw):
        verts, interior = _materialize(geom)
        cell = _finish_cell(cid, normals, offsets, ids, signs, verts,
                            interior, tol)
        cells.append(cell)
    return Arrangement(planes=list(planes), bbox=bbox, cells=cells, tol=tol)


def _materialize(geom):
    if geom[0] == "verts":
        return geom[1], geom[2]
    lo, hi = np.asarray(geom[1]), np.asarray(geom[2])
    verts = np.array(np.meshgrid(*zip(lo, hi), indexing="ij"))
    return verts.reshape(len(lo), -1).T, 0.5 * (lo + hi)


def _plane_axis(plane: Hyperplane):
    """(axis index, sign) when the plane is axis-aligned, else None."""
    k = int(np.argmax(np.abs(plane.normal)))
    if abs(abs(plane.normal[k]) - 1.0) <= 1e-12 and \
            np.sum(np.abs(plane.normal)) <= 1.0 + 1e-12:
        return k, (1.0 if plane.normal[k] > 0 else -1.0)
    return None


def _child_interior(x0: np.ndarray, val0: float, verts: np.ndarray,
                    vals: np.ndarray, positive: bool) -> np.ndarray:
    """Strictly interior point of (cell intersect halfspace).

    Points strictly between the cell's interior point and a vertex stay
    interior; blending toward the deepest vertex on the kept side lands at
    half that vertex's plane distance, safely off every bounding plane."""
    k = int(np.argmax(vals)) if positive else int(np.argmin(vals))
    target = float(vals[k])
    if (positive and val0 >= 0.5 * target) or (not positive and val0 <= 0.5 * target):
        return x0
    if abs(target - val0) < 1e-300:
        return None
    t = (0.5 * target - val0) / (target - val0)
    return x0 + t * (verts[k] - x0)


def _finish_cell(cid, normals, offsets, ids, signs, verts, center, tol) -> Cell:
    d = normals.shape[1]
    rad = float(np.min(offsets - normals @ center))
    if center is None or rad <= 0:
        raise GeometryError(f"cell {cid} degenerate (interior radius {rad})")

    keep_rows, faces = [], []
    dists = normals @ verts.T - offsets[:, None]
    for row in range(len(normals)):
        on = np.abs(dists[row]) <= 50 * tol.eps_geom
        pts = verts[on]
        if len(pts) < d:
            continue  # redundant constraint: no supporting facet
        if float(np.max(np.ptp(pts, axis=0))) <= tol.eps_geom:
            continue  # degenerate sliver facet
        plane = Hyperplane(normals[row], float(offsets[row]))
        keep_rows.append(row)
        faces.append(Face(plane=plane, plane_id=ids[row], points=pts))

    if not keep_rows:
        raise GeometryError(f"cell {cid} has no facets")
    return Cell(
        id=cid,
        normals=normals[keep_rows].copy(),
        offsets=offsets[keep_rows].copy(),
        faces=faces,
        plane_ids=[ids[r] for r in keep_rows],
        sign_vector=tuple(signs),
        vertices=verts,
        interior_point=center,
        inradius=rad,
    )


def _poly_area2(loop: np.ndarray) -> float:
    x, y = loop[:, 0], loop[:, 1]
    return float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def nearest_face(x, cell: Cell, tol: Tolerance) -> NearestFaces:
    """Nearest face(s) of the cell to an interior point, with projections.

    For a convex cell the distance to the boundary is the minimum slack over
    the facet halfspaces, and the projection onto the nearest facet's plane
    lies on that facet.
    """
    x = as_point(x, cell.dim)
    slack = cell.slacks(x)[:, 0]
    dmin = float(np.min(slack))
    if dmin < -10 * tol.eps_geom:
        raise GeometryError("point outside the cell")
    tied = np.nonzero(slack <= dmin + tol.eps_geom)[0]
    pts = x[None, :] + slack[tied, None] * cell.normals[tied]
    return NearestFaces(face_indices=[int(i) for i in tied], points=pts,
                        distance=max(dmin, 0.0))


def cell_height(cell: Cell, tol: Tolerance | None = None) -> float:
    """Max distance from a cell point to its nearest cutting plane.

    Bounding-box walls are excluded: the height is a property of the cutting
    planes, so a slab reports half the plane distance and a cell whose
    cutting planes leave it unbounded reports +inf.
    """
    rows = [i for i, pid in enumerate(cell.plane_ids) if pid != BBOX_ID]
    if not rows:
        return math.inf
    box = _axis_aligned_box(cell.normals[rows], cell.offsets[rows], tol)
    if box is not None:
        # product of slabs/halfspaces: the inscribed radius is half the
        # narrowest two-sided width (the center escapes open directions)
        widths = box[1] - box[0]
        return float(np.min(widths)) / 2.0
    _, r = chebyshev_center(cell.normals[rows], cell.offsets[rows])
    return r

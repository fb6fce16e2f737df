"""Lifting boundary points of a cell onto its Voronoi skeleton.

The skeleton itself is never constructed.  For a point a on a face f, the
travel distance t* along the inward normal until some other face becomes
equally near has the closed form

    t* = min over faces g != f of  slack_g(a) / (1 - n_g . n_f)

(outward unit normals; slack_g(a) is a's interior distance to g's plane),
valid because slack_g varies linearly with rate n_g . n_f along the inward
normal of f.  Faces with n_g . n_f >= 1 - eps are skipped as non-opposing;
an exactly opposite parallel face yields t = slack/2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .arrangement import Cell, Face
from .exact import lower_envelope
from .geometry import GeometryError, Interval, Tolerance, as_point


@dataclass(eq=False)
class LiftResult:
    point: np.ndarray  # on the Voronoi skeleton of the cell
    travel: float  # distance along the inward normal (t*)
    source_face: int
    opposing_faces: list[int]  # faces achieving the minimum (skeleton sheet hit)
    finite: bool = True


@dataclass(eq=False)
class LiftedPolyline:
    """Exact piecewise-linear lift of an interval on a 2D cell edge."""

    params: np.ndarray  # breakpoint parameters along the edge
    travels: np.ndarray  # t* at each breakpoint
    points: np.ndarray  # lifted points (on the skeleton)
    sources: np.ndarray  # corresponding edge points
    piece_faces: list[int]  # opposing face per linear piece


def find_face(a, cell: Cell, tol: Tolerance) -> int:
    """Index of the face whose plane and region contain a."""
    a = as_point(a, cell.dim)
    slack = cell.slacks(a)[:, 0]
    for i in np.argsort(np.abs(slack)):
        if abs(slack[i]) > 10 * tol.eps_geom:
            break
        f = cell.faces[i]
        local = f.plane.to_local(a[None, :])[0]
        if isinstance(f.region, Interval):
            if f.region.contains(float(local[0]), tol) >= 0:
                return int(i)
        elif f.region.contains(local, tol) >= 0:
            return int(i)
    raise GeometryError("point does not lie on any face of the cell")


def _travel_candidates(a: np.ndarray, cell: Cell, face_index: int,
                       tol: Tolerance) -> np.ndarray:
    nf = cell.normals[face_index]
    slack = cell.slacks(a)[:, 0]
    rates = cell.normals @ nf
    t = np.full(len(slack), math.inf)
    for g in range(len(slack)):
        if g == face_index:
            continue
        denom = 1.0 - rates[g]
        if denom <= tol.eps_angle:
            continue  # same-facing (near-parallel) face: never opposes
        t[g] = max(slack[g], 0.0) / denom
    return t


def lift_point(a, cell: Cell, face_index: int | None = None,
               tol: Tolerance | None = None) -> LiftResult:
    """Lift a point on a face of the cell onto the Voronoi skeleton."""
    tol = tol or Tolerance()
    a = as_point(a, cell.dim)
    if face_index is None:
        face_index = find_face(a, cell, tol)
    else:
        slack = float(cell.slacks(a)[face_index, 0])
        if abs(slack) > 10 * tol.eps_geom:
            raise GeometryError("point is not on the given face")
    t = _travel_candidates(a, cell, face_index, tol)
    t_star = float(np.min(t))
    if not math.isfinite(t_star):
        return LiftResult(point=np.full(cell.dim, np.nan), travel=math.inf,
                          source_face=face_index, opposing_faces=[], finite=False)
    opposing = np.nonzero(t <= t_star + tol.eps_geom)[0]
    lifted = a - t_star * cell.normals[face_index]
    return LiftResult(point=lifted, travel=t_star, source_face=face_index,
                      opposing_faces=[int(i) for i in opposing])


def lift_polyline(interval: Interval, cell: Cell, face_index: int,
                  tol: Tolerance | None = None) -> LiftedPolyline:
    """Lift an interval on a 2D cell edge: exact piecewise-linear result.

    Each candidate travel t_g is affine along the edge, so t* is the lower
    envelope of lines; breakpoints come from pairwise crossings.
    """
    tol = tol or Tolerance()
    if cell.dim != 2:
        raise GeometryError("lift_polyline is a 2D operation")
    face = cell.faces[face_index]
    reg = face.region
    if not isinstance(reg, Interval):
        raise GeometryError("face region is not an interval")
    if interval.lo < reg.lo - 10 * tol.eps_geom or interval.hi > reg.hi + 10 * tol.eps_geom:
        raise GeometryError("interval not contained in the edge")

    origin, u = face.plane.basis()
    u = u[:, 0]
    nf = cell.normals[face_index]
    lines = []
    rows = []
    for g in range(len(cell.normals)):
        if g == face_index:
            continue
        denom = 1.0 - float(cell.normals[g] @ nf)
        if denom <= tol.eps_angle:
            continue
        ng, og = cell.normals[g], cell.offsets[g]
        # slack_g(origin + s u) = og - ng.origin - s ng.u
        b = (og - float(ng @ origin)) / denom
        m = -float(ng @ u) / denom
        lines.append((m, b))
        rows.append(g)
    if not lines:
        raise GeometryError("no opposing faces: cell unbounded along the lift")

    if interval.length() == 0:
        res = lift_point(origin + interval.lo * u, cell, face_index, tol)
        return LiftedPolyline(
            params=np.array([interval.lo]),
            travels=np.array([res.travel]),
            points=res.point[None, :],
            sources=(origin + interval.lo * u)[None, :],
            piece_faces=[res.opposing_faces[0]],
        )

    env = lower_envelope(lines, interval.lo, interval.hi, eps=0.0)
    params = np.array([s for s, _, _ in env])
    travels = np.array([v for _, v, _ in env])
    sources = origin[None, :] + params[:, None] * u[None, :]
    points = sources - travels[:, None] * nf[None, :]
    piece_faces = [rows[idx] for _, _, idx in env[:-1]]
    return LiftedPolyline(params=params, travels=travels, points=points,
                          sources=sources, piece_faces=piece_faces)


@dataclass(eq=False)
class OverlapComponent:
    skeleton_points: np.ndarray
    source_points: np.ndarray  # sample points on the first section


def lift_overlap_components(region_a, face_a: int, region_b, face_b: int,
                            cell: Cell, resolution: float,
                            tol: Tolerance | None = None,
                            reach_estimate: float | None = None) -> list[OverlapComponent]:
    """Sampled connected components of the two lift images' intersection.

    Diagnostic only: A is sampled at the given resolution, each sample is
    lifted, and the lift's other nearest point is tested against B.  Hits
    are clustered by sample-grid adjacency.
    """
    tol = tol or Tolerance()
    if face_a == face_b:
        raise GeometryError("overlap requires two distinct faces")
    if reach_estimate is not None and resolution > reach_estimate / 2:
        warnings.warn("overlap sampling coarser than half the reach estimate")

    fa = cell.faces[face_a]
    fb = cell.faces[face_b]
    origin_a, ua = fa.plane.basis()

    if cell.dim == 2:
        reg = region_a if isinstance(region_a, Interval) else fa.region
        n = max(2, int(math.ceil(reg.length() / resolution)) + 1)
        ts = np.linspace(reg.lo, reg.hi, n)
        samples = origin_a[None, :] + ts[:, None] * ua[:, 0][None, :]
        grid_idx = [(i,) for i in range(n)]
    else:
        lo, hi = region_a.bbox()
        nx = max(2, int(math.ceil((hi[0] - lo[0]) / resolution)) + 1)
        ny = max(2, int(math.ceil((hi[1] - lo[1]) / resolution)) + 1)
        gx, gy = np.meshgrid(np.linspace(lo[0], hi[0], nx),
                             np.linspace(lo[1], hi[1], ny), indexing="ij")
        loc = np.stack([gx.ravel(), gy.ravel()], axis=1)
        keep = region_a.contains_batch(loc, tol) >= 0
        # also require the sample to lie on the actual face of the cell
        on_face = fa.region.contains_batch(loc, tol) >= 0
        keep &= on_face
        loc = loc[keep]
        samples = fa.plane.to_world(loc)
        ij = np.stack(np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij"),
                      axis=-1).reshape(-1, 2)[keep]
        grid_idx = [tuple(v) for v in ij]

    hits = []
    hit_cells = []
    lift_eps = max(10 * tol.eps_geom, 1e-9)
    for k, a in enumerate(samples):
        res = lift_point(a, cell, face_a, tol)
        if not res.finite:
            continue
        slack_b = float(cell.slacks(res.point)[face_b, 0])
        if abs(slack_b - res.travel) > max(lift_eps, 1e-6 * max(res.travel, 1.0)):
            continue  # face_b is not among the nearest faces of the lift
        proj = res.point + slack_b * cell.normals[face_b]
        loc_b = fb.plane.to_local(proj[None, :])[0]
        if isinstance(region_b, Interval):
            inside = region_b.contains(float(loc_b[0]), tol) >= 0
        else:
            inside = region_b.contains(loc_b, tol) >= 0
        if inside:
            hits.append((res.point, a))
            hit_cells.append(grid_idx[k])

    if not hits:
        return []

    # cluster hits by sample-grid adjacency
    index_of = {c: i for i, c in enumerate(hit_cells)}
    parent = list(range(len(hits)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, c in enumerate(hit_cells):
        deltas = [(-1,), (1,)] if len(c) == 1 else \
            [(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1) if (dx, dy) != (0, 0)]
        for dlt in deltas:
            nb = tuple(a + b for a, b in zip(c, dlt))
            j = index_of.get(nb)
            if j is not None and find(i) != find(j):
                parent[find(i)] = find(j)

    groups: dict[int, list[int]] = {}
    for i in range(len(hits)):
        groups.setdefault(find(i), []).append(i)
    return [
        OverlapComponent(
            skeleton_points=np.stack([hits[i][0] for i in idxs]),
            source_points=np.stack([hits[i][1] for i in idxs]),
        )
        for idxs in groups.values()
    ]

"""Sampling-condition checkers: density, transversality, sampled separation,
and the boundary-cut test.

The density condition asks every cell's height to stay below the localized
reach; the transversality condition sharpens the bound by the worst angle
between cutting planes and boundary normals along section-contours in the
cell, and implies the density condition.  Reach and angles are sampled, so
results carry margins, and margins inside the sampling-error band are
reported as inconclusive rather than pass/fail.

Cells that no boundary or medial sample touches are vacuous: they impose no
constraint and pass with infinite margin (the paper's per-cell bound is only
ever exercised by cells that meet the shape or its medial axis).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arrangement import BBOX_ID, Arrangement, cell_height
from .geometry import (
    Box,
    GeneralPositionViolation,
    GeometryError,
    Interval,
    Tolerance,
)
from .reconstruction import SectionSet, in_reconstruction_batch
from .shapes import EXTERNAL, INTERNAL, Shape, retract_travel


@dataclass(eq=False)
class RetractField:
    """Boundary samples with their medial retract distances, shared by all
    per-cell reach queries of one scene."""

    points: np.ndarray
    normals: np.ndarray
    t_int: np.ndarray
    t_ext: np.ndarray
    cap: float

    @staticmethod
    def build(shape: Shape, bbox: Box, n_samples: int = 6000,
              rng=None) -> "RetractField":
        rng = rng or np.random.default_rng(2024)
        cap = 2.0 * bbox.diameter()
        a = shape.boundary_samples(rng, n_samples)
        nrm = shape.boundary_normals_batch(a)
        t_int = retract_travel(shape, a, -nrm, cap)
        t_ext = retract_travel(shape, a, nrm, cap)
        return RetractField(points=a, normals=nrm, t_int=t_int, t_ext=t_ext,
                            cap=cap)

    def spacing_estimate(self, shape: Shape) -> float:
        area = sum(c.boundary_area() for c in shape.components)
        n = len(self.points)
        if shape.dim == 2:
            return area / max(n, 1)
        return math.sqrt(area / max(n, 1))

    def reach_in_cell(self, cell) -> tuple[float, int]:
        """(localized reach, number of contributing sample pairs)."""
        a_in = np.min(cell.slacks(self.points), axis=0) >= 0
        best = math.inf
        count = 0
        for t, sgn in ((self.t_int, -1.0), (self.t_ext, 1.0)):
            m = self.points + sgn * t[:, None] * self.normals
            finite = t < self.cap * 0.99
            m_in = np.zeros(len(m), dtype=bool)
            if np.any(finite):
                m_in[finite] = np.min(cell.slacks(m[finite]), axis=0) >= 0
            relevant = finite & (a_in | m_in)
            count += int(np.count_nonzero(relevant))
            if np.any(relevant):
                best = min(best, float(np.min(t[relevant])))
        return best, count

    def per_cell_reaches(self, arr) -> tuple[np.ndarray, np.ndarray]:
        """(reach, pair count) per cell in one pass: every retract pair is
        binned to the cells holding its endpoints (the boundary-tie rule
        assigns on-plane samples to one side, which is within the sampling
        tolerance of the checker)."""
        n_cells = len(arr.cells)
        best = np.full(n_cells, math.inf)
        count = np.zeros(n_cells, dtype=np.int64)
        ids_a = arr.locate_batch(self.points)
        for t, sgn in ((self.t_int, -1.0), (self.t_ext, 1.0)):
            finite = t < self.cap * 0.99
            m = self.points + sgn * t[:, None] * self.normals
            inb = np.all((m >= arr.bbox.lo) & (m <= arr.bbox.hi), axis=1)
            inside = finite & inb
            ids_m = np.full(len(m), -1, dtype=np.int64)
            if np.any(inside):
                ids_m[inside] = arr.locate_batch(m[inside])
            for ids, mask in ((ids_a, finite), (ids_m, inside)):
                sel = mask & (ids >= 0)
                if not np.any(sel):
                    continue
                np.minimum.at(best, ids[sel], t[sel])
                np.add.at(count, ids[sel], 1)
        return best, count

    def global_reach(self) -> float:
        return float(np.min(np.minimum(self.t_int, self.t_ext)))


@dataclass
class CellConditions:
    cell_id: int
    height: float
    reach: float
    alpha: float  # radians; 0 when the cell holds no contour points
    c1: bool | None  # None = inconclusive (margin inside sampling band)
    c2: bool | None
    c1_margin: float
    c2_margin: float
    vacuous: bool
    samples: int

    def to_dict(self):
        return {
            "cell": self.cell_id,
            "height": _num(self.height),
            "reach": _num(self.reach),
            "alpha": _num(self.alpha),
            "c1": self.c1,
            "c2": self.c2,
            "c1_margin": _num(self.c1_margin),
            "c2_margin": _num(self.c2_margin),
            "vacuous": self.vacuous,
            "samples": self.samples,
        }


def _num(x):
    if x is None:
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


@dataclass
class ConditionReport:
    cells: list[CellConditions]
    separation_pass: bool | None
    separation_witnesses: list
    boundary_cut_pass: bool | None
    boundary_sheets: list
    samples_used: int
    reach_bound_used: float | None = None

    @property
    def all_c1(self) -> bool:
        return all(c.c1 is True or c.vacuous for c in self.cells)

    @property
    def all_c2(self) -> bool:
        return all(c.c2 is True or c.vacuous for c in self.cells)

    def implication_holds(self) -> bool:
        """No cell may pass transversality while failing density."""
        return not any(c.c2 is True and c.c1 is False for c in self.cells)

    def to_dict(self):
        return {
            "cells": [c.to_dict() for c in self.cells],
            "all_c1": self.all_c1,
            "all_c2": self.all_c2,
            "separation_pass": self.separation_pass,
            "separation_witnesses": [
                {"point": [float(v) for v in w[0]], "side": w[1]}
                for w in self.separation_witnesses[:8]],
            "boundary_cut_pass": self.boundary_cut_pass,
            "boundary_sheets": [
                {"component": c, "sheet": s, "cut": bool(cut)}
                for (c, s, cut) in self.boundary_sheets],
            "samples_used": self.samples_used,
            "reach_bound_used": self.reach_bound_used,
        }


# ---------------------------------------------------------------------------
# per-cell angle between cutting planes and boundary normals


def contour_samples_3d(sections: SectionSet, plane_id: int,
                       min_per_contour: int):
    """Contour sample points in world coordinates: the section polygons'
    vertices (these lie on the true contour up to the chordal tolerance,
    unlike densified chord points, which sit strictly inside the shape)."""
    frame = sections.frames[plane_id]
    loops = [loop for reg in sections.regions[plane_id]
             if not isinstance(reg, Interval) for loop in reg.loops()]
    if not loops:
        return np.zeros((0, 3))
    _ = min_per_contour  # guaranteed by the section polygonization minimum
    return frame.to_world(np.vstack(loops))


def contact_angles(shape: Shape, arr: Arrangement, sections: SectionSet,
                   contour_samples: int = 64,
                   tol: Tolerance | None = None,
                   with_gap: bool = False):
    """Per-cell max angle between each cutting plane and the boundary normal
    along section-contours lying in (the closure of) the cell.

    Raises GeneralPositionViolation on (near-)tangential contact.  With
    with_gap=True also returns the largest sine jump between consecutive
    contour vertices, an upper-bound proxy for discretization error."""
    tol = tol or arr.tol
    if contour_samples < 32:
        raise GeometryError("need at least 32 contour samples per contour")

    per_plane_pts: dict[int, np.ndarray] = {}
    per_plane_alpha: dict[int, np.ndarray] = {}
    sine_gap = 0.0
    for pid, plane in enumerate(sections.planes):
        if arr.dim == 2:
            pts = []
            for iv in sections.regions[pid]:
                origin = sections.frames[pid].origin
                u = sections.frames[pid].axes[:, 0]
                pts.extend([origin + iv.lo * u, origin + iv.hi * u])
            pts = np.array(pts) if pts else np.zeros((0, 2))
            if len(pts):
                normals = shape.boundary_normals_batch(pts)
                sines = np.clip(np.abs(normals @ plane.normal), 0.0, 1.0)
            else:
                sines = np.zeros(0)
        else:
            loops = [loop for reg in sections.regions[pid]
                     if not isinstance(reg, Interval) for loop in reg.loops()]
            if loops:
                frame = sections.frames[pid]
                sines_parts = []
                for loop in loops:
                    w = frame.to_world(loop)
                    normals = shape.boundary_normals_batch(w)
                    s = np.clip(np.abs(normals @ plane.normal), 0.0, 1.0)
                    jump = np.abs(np.diff(np.concatenate([s, s[:1]])))
                    sine_gap = max(sine_gap, float(jump.max()) if len(jump) else 0.0)
                    sines_parts.append(s)
                pts = frame.to_world(np.vstack(loops))
                sines = np.concatenate(sines_parts)
            else:
                pts = np.zeros((0, 3))
                sines = np.zeros(0)
        if len(pts) == 0:
            per_plane_pts[pid] = pts
            per_plane_alpha[pid] = np.zeros(0)
            continue
        alphas = np.arcsin(sines)
        if np.any(alphas >= math.pi / 2 - tol.eps_angle):
            raise GeneralPositionViolation(
                f"cutting plane {pid} tangential to the boundary")
        per_plane_pts[pid] = pts
        per_plane_alpha[pid] = alphas

    # contour points lie on their plane, and both adjacent cells own them;
    # nudge each point to both sides and bin with the point locator
    amax = np.zeros(len(arr.cells))
    nudge = 10 * tol.eps_geom
    for pid, plane in enumerate(sections.planes):
        pts = per_plane_pts.get(pid)
        if pts is None or len(pts) == 0:
            continue
        al = per_plane_alpha[pid]
        for side in (+1.0, -1.0):
            moved = pts + side * nudge * plane.normal
            ok = np.all((moved >= arr.bbox.lo) & (moved <= arr.bbox.hi), axis=1)
            if not np.any(ok):
                continue
            ids = arr.locate_batch(moved[ok])
            np.maximum.at(amax, ids, al[ok])
    out = {cell.id: float(amax[cell.id]) for cell in arr.cells}
    if with_gap:
        return out, sine_gap
    return out


# ---------------------------------------------------------------------------
# the checkers


def evaluate_conditions(shape: Shape, arr: Arrangement, sections: SectionSet,
                        n_samples: int = 6000, contour_samples: int = 64,
                        reach_lower_bound: float | None = None,
                        rng=None, tol: Tolerance | None = None,
                        separation_samples: int = 400) -> ConditionReport:
    """Full condition evaluation for a scene with ground truth."""
    tol = tol or arr.tol
    field_ = RetractField.build(shape, arr.bbox, n_samples, rng)
    band_sampled = 2.0 * field_.spacing_estimate(shape)
    alphas, sine_gap = contact_angles(shape, arr, sections, contour_samples,
                                      tol, with_gap=True)

    reaches, counts = field_.per_cell_reaches(arr)
    cells = []
    for cell in arr.cells:
        h = cell_height(cell, tol)
        reach_c = float(reaches[cell.id])
        count = int(counts[cell.id])
        vacuous = count == 0
        if reach_lower_bound is not None and not vacuous:
            reach_used = reach_lower_bound
            # height is an exact LP value and the reach bound is exact, so
            # only the contour discretization of alpha can blur the margin
            band = reach_used * (sine_gap + 100 * tol.eps_geom)
        else:
            reach_used = reach_c
            band = band_sampled
        alpha = alphas.get(cell.id, 0.0)

        if vacuous:
            c1, c2 = True, True
            m1 = m2 = math.inf
        else:
            m1 = reach_used - h
            thr = 0.5 * (1.0 - math.sin(alpha)) * reach_used
            m2 = thr - h
            c1 = _verdict(m1, band)
            c2 = _verdict(m2, band)
            if c2 is True:
                c1 = True  # transversality implies density
        cells.append(CellConditions(cell_id=cell.id, height=h,
                                    reach=reach_used, alpha=alpha,
                                    c1=c1, c2=c2, c1_margin=m1, c2_margin=m2,
                                    vacuous=vacuous, samples=count))

    sep_pass, witnesses = check_separation_sampled(
        shape, arr, sections, n=separation_samples, tol=tol)
    sheets = shape.boundary_sheets_cut(arr.planes)
    cut_pass = all(cut for (_, _, cut) in sheets)
    return ConditionReport(cells=cells, separation_pass=sep_pass,
                           separation_witnesses=witnesses,
                           boundary_cut_pass=cut_pass, boundary_sheets=sheets,
                           samples_used=n_samples,
                           reach_bound_used=reach_lower_bound)


def _verdict(margin: float, band: float) -> bool | None:
    if margin > band:
        return True
    if margin < -band:
        return False
    return None  # inconclusive: |margin| within twice the sampling error


def check_density(arr: Arrangement, shape: Shape,
                  n_samples: int = 6000, rng=None,
                  reach_lower_bound: float | None = None,
                  tol: Tolerance | None = None) -> dict[int, bool | None]:
    """Per-cell density condition: height < localized reach (strict)."""
    tol = tol or arr.tol
    field_ = RetractField.build(shape, arr.bbox, n_samples, rng)
    band = 2.0 * field_.spacing_estimate(shape)
    out = {}
    for cell in arr.cells:
        h = cell_height(cell, tol)
        reach_c, count = field_.reach_in_cell(cell)
        if count == 0 and not math.isfinite(reach_c):
            out[cell.id] = True  # vacuous
            continue
        if reach_lower_bound is not None:
            reach_c = reach_lower_bound
        out[cell.id] = _verdict(reach_c - h, band)
    return out


def check_transversality(arr: Arrangement, shape: Shape, sections: SectionSet,
                         n_samples: int = 6000, contour_samples: int = 64,
                         rng=None, tol: Tolerance | None = None) -> dict[int, bool | None]:
    report = evaluate_conditions(shape, arr, sections, n_samples,
                                 contour_samples, rng=rng, tol=tol,
                                 separation_samples=0)
    return {c.cell_id: (True if c.vacuous else c.c2) for c in report.cells}


def check_separation_sampled(shape: Shape, arr: Arrangement,
                             sections: SectionSet, n: int = 400,
                             tol: Tolerance | None = None):
    """All internal medial samples must lie in the reconstruction and all
    external ones (within the bbox) outside it."""
    tol = tol or arr.tol
    if n <= 0:
        return None, []
    witnesses = []
    try:
        internal = shape.medial_samples(INTERNAL, n, arr.bbox)
        external = shape.medial_samples(EXTERNAL, n, arr.bbox)
    except GeometryError:
        return None, []  # no analytic medial data for this shape
    if internal:
        pts = np.stack([m.point for m in internal])
        ok = in_reconstruction_batch(pts, arr, sections, tol)
        for m, good in zip(internal, ok):
            if not good:
                witnesses.append((m.point, INTERNAL, m.radius))
    if external:
        pts = np.stack([m.point for m in external])
        bad = in_reconstruction_batch(pts, arr, sections, tol)
        for m, b in zip(external, bad):
            if b:
                witnesses.append((m.point, EXTERNAL, m.radius))
    return len(witnesses) == 0, witnesses


def check_boundary_cut(shape: Shape, planes) -> tuple[bool, list]:
    """Every boundary sheet must be crossed by at least one cutting plane."""
    sheets = shape.boundary_sheets_cut(list(planes))
    return all(cut for (_, _, cut) in sheets), sheets

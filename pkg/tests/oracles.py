"""Independent test oracles shared between module tests and the acceptance
suite.  These deliberately avoid the code paths they check."""

import numpy as np

from crosslift.arrangement import cell_height
from crosslift.geometry import Interval, Tolerance
from crosslift.lifting import lift_point


def segment_union(arr, sections, tol: Tolerance, per_region: int = 2000):
    """Sampled reconstruction-defining segments [a, lift(a)].

    Every sampled section point is lifted inside both adjacent cells.
    Returns (starts, ends, spacing): spacing is the sampling pitch, the
    scale of the oracle's blur band.
    """
    starts, ends = [], []
    spacing = 0.0
    for pid, plane in enumerate(sections.planes):
        frame = sections.frames[pid]
        for reg in sections.regions[pid]:
            if isinstance(reg, Interval):
                n = per_region
                ss = np.linspace(reg.lo, reg.hi, n)
                pts = frame.to_world(ss[:, None])
                spacing = max(spacing, reg.length() / max(n - 1, 1))
            else:
                lo, hi = reg.bbox()
                step = float(max(hi - lo)) / int(np.sqrt(per_region))
                g1, g2 = np.meshgrid(np.arange(lo[0], hi[0] + step, step),
                                     np.arange(lo[1], hi[1] + step, step),
                                     indexing="ij")
                loc = np.stack([g1.ravel(), g2.ravel()], axis=1)
                keep = reg.contains_batch(loc, tol) >= 0
                pts = frame.to_world(loc[keep])
                spacing = max(spacing, step)
            for p in pts:
                for side in (1.0, -1.0):
                    probe = p + 1e-7 * side * plane.normal
                    try:
                        cid = arr.locate_cell(probe)
                    except Exception:
                        continue
                    cell = arr.cells[cid]
                    rows = [i for i, q in enumerate(cell.plane_ids) if q == pid]
                    if not rows:
                        continue
                    res = lift_point(p, cell, rows[0], tol)
                    if res.finite:
                        starts.append(p)
                        ends.append(res.point)
    return np.array(starts), np.array(ends), spacing


def segment_union_membership(points, starts, ends, band):
    """True where a point lies within `band` of some sampled segment."""
    d = ends - starts
    L2 = np.einsum("ij,ij->i", d, d)
    out = np.zeros(len(points), dtype=bool)
    dmin = np.full(len(points), np.inf)
    chunk = 400
    for s in range(0, len(points), chunk):
        pts = points[s:s + chunk]
        # (m, n) distances point-to-segment
        diff = pts[:, None, :] - starts[None, :, :]
        t = np.clip(np.einsum("mnj,nj->mn", diff, d) / np.maximum(L2, 1e-300), 0, 1)
        proj = starts[None, :, :] + t[..., None] * d[None, :, :]
        dist = np.linalg.norm(pts[:, None, :] - proj, axis=2).min(axis=1)
        dmin[s:s + chunk] = dist
        out[s:s + chunk] = dist <= band
    return out, dmin


def zoom_grid_height(cell, tol: Tolerance, levels: int = 11, n: int = 12):
    """Max distance to the cutting planes over the cell by refined grids.

    Independent of the LP: evaluates min plane slack on nested grids
    shrinking around the best point (the objective is concave, so local
    refinement converges to the global max).
    """
    rows = [i for i, pid in enumerate(cell.plane_ids) if pid != "bbox"]
    normals = cell.normals[rows]
    offsets = cell.offsets[rows]

    lo = cell.vertices.min(axis=0)
    hi = cell.vertices.max(axis=0)
    dim = len(lo)
    best_val, best_pt = -np.inf, None
    for _ in range(levels):
        axes = [np.linspace(lo[k], hi[k], n) for k in range(dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        inside = np.min(cell.slacks(pts), axis=0) >= -1e-12
        if not np.any(inside):
            break
        pts = pts[inside]
        vals = np.min(offsets[:, None] - normals @ pts.T, axis=0)
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val, best_pt = float(vals[k]), pts[k]
        span = (hi - lo) / (n - 1)
        lo = np.maximum(best_pt - 1.2 * span, cell.vertices.min(axis=0))
        hi = np.minimum(best_pt + 1.2 * span, cell.vertices.max(axis=0))
    return best_val


def check_heights_against_grid(cells, tol, rel=1e-6):
    """Compare LP heights with the zoom-grid oracle on bounded cells."""
    import math

    checked = 0
    for cell in cells:
        h = cell_height(cell, tol)
        if not (math.isfinite(h) and cell.bounded):
            continue
        g = zoom_grid_height(cell, tol)
        assert abs(g - h) <= rel * max(h, 1e-12), (h, g)
        checked += 1
    return checked

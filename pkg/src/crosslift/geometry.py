"""Dimension-generic (2D/3D) primitives, predicates, and the tolerance policy.

Points and vectors are plain numpy float arrays of length 2 or 3; batches are
(m, d) arrays.  Everything here is immutable after construction and safe to
read from multiple threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

INSIDE = 1
ON_BOUNDARY = 0
OUTSIDE = -1


class GeometryError(ValueError):
    """Invalid geometric input (non-finite data, degenerate polygon, ...)."""


class GeneralPositionViolation(GeometryError):
    """A configuration the pipeline requires to be in general position is not
    (e.g. a cutting plane tangent to the shape boundary)."""


def as_point(x, dim: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.shape[0] not in (2, 3):
        raise GeometryError(f"expected a 2D/3D point, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise GeometryError(f"expected dimension {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise GeometryError("non-finite coordinates")
    return v


@dataclass(frozen=True)
class Tolerance:
    """Scene-relative tolerance policy.

    eps_geom is a length (scaled by the scene diameter so scenes are
    unit-insensitive); eps_angle is in radians.
    """

    eps_geom: float = 1e-9
    eps_angle: float = 1e-9

    def __post_init__(self):
        if not (self.eps_geom > 0 and self.eps_angle > 0):
            raise GeometryError("tolerances must be strictly positive")

    @staticmethod
    def for_diameter(diameter: float) -> "Tolerance":
        return Tolerance(eps_geom=1e-9 * max(float(diameter), 1.0))


@dataclass(frozen=True, eq=False)
class Hyperplane:
    """Oriented hyperplane {x : normal . x = offset} with unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = as_point(self.normal)
        norm = float(np.linalg.norm(n))
        if norm < 1e-12:
            raise GeometryError("hyperplane normal has zero length")
        if abs(norm - 1.0) > 1e-12:
            n = n / norm
            object.__setattr__(self, "offset", float(self.offset) / norm)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))
        self.normal.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.normal.shape[0]

    def flipped(self) -> "Hyperplane":
        return Hyperplane(-self.normal, -self.offset)

    def basis(self) -> tuple[np.ndarray, np.ndarray]:
        """In-plane frame: (origin, U) with U of shape (d, d-1).

        Deterministic so serialized scenes can rely on it.
        """
        n = self.normal
        origin = self.offset * n
        if self.dim == 2:
            u = np.array([-n[1], n[0]])
            return origin, u.reshape(2, 1)
        k = int(np.argmin(np.abs(n)))
        e = np.zeros(3)
        e[k] = 1.0
        u1 = np.cross(n, e)
        u1 /= np.linalg.norm(u1)
        u2 = np.cross(n, u1)
        return origin, np.stack([u1, u2], axis=1)

    def to_local(self, points: np.ndarray) -> np.ndarray:
        origin, u = self.basis()
        pts = np.atleast_2d(points)
        return (pts - origin) @ u

    def to_world(self, locals_: np.ndarray) -> np.ndarray:
        origin, u = self.basis()
        loc = np.atleast_2d(locals_)
        return origin + loc @ u.T


def signed_distance(x, h: Hyperplane) -> float:
    """normal . x - offset; positive on the normal side."""
    return float(np.dot(h.normal, np.asarray(x, dtype=float)) - h.offset)


def signed_distance_batch(points: np.ndarray, h: Hyperplane) -> np.ndarray:
    return np.atleast_2d(points) @ h.normal - h.offset


def _loop_area2(loop: np.ndarray) -> float:
    x, y = loop[:, 0], loop[:, 1]
    return float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _segment_distance_batch(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = b - a
    L2 = float(d @ d)
    if L2 == 0.0:
        return np.linalg.norm(points - a, axis=1)
    t = np.clip(((points - a) @ d) / L2, 0.0, 1.0)
    proj = a + t[:, None] * d
    return np.linalg.norm(points - proj, axis=1)


def _crossings(points: np.ndarray, loop: np.ndarray) -> np.ndarray:
    """Parity of +x ray crossings for each point, vectorized over edges."""
    px, py = points[:, 0], points[:, 1]
    inside = np.zeros(len(points), dtype=bool)
    x1, y1 = loop[:, 0], loop[:, 1]
    x2, y2 = np.roll(loop[:, 0], -1), np.roll(loop[:, 1], -1)
    for i in range(len(loop)):
        cond = (y1[i] > py) != (y2[i] > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xin = x1[i] + (py - y1[i]) * (x2[i] - x1[i]) / (y2[i] - y1[i])
        inside ^= cond & (px < xin)
    return inside


@dataclass(eq=False)
class PolygonWithHoles:
    """Polygon with optional holes, in 2D local coordinates.

    The outer loop is stored counter-clockwise and holes clockwise; the
    constructor reorients as needed.  Loops must be simple and holes must lie
    strictly inside the outer loop (checked by validate()).
    """

    outer: np.ndarray
    holes: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        out = np.asarray(self.outer, dtype=float)
        if out.ndim != 2 or out.shape[1] != 2 or out.shape[0] < 3:
            raise GeometryError("outer loop needs at least 3 points in 2D")
        if not np.all(np.isfinite(out)):
            raise GeometryError("non-finite polygon coordinates")
        if _loop_area2(out) < 0:
            out = out[::-1].copy()
        self.outer = out
        fixed = []
        for h in self.holes:
            h = np.asarray(h, dtype=float)
            if h.ndim != 2 or h.shape[1] != 2 or h.shape[0] < 3:
                raise GeometryError("hole loop needs at least 3 points in 2D")
            if not np.all(np.isfinite(h)):
                raise GeometryError("non-finite polygon coordinates")
            if _loop_area2(h) > 0:
                h = h[::-1].copy()
            fixed.append(h)
        self.holes = fixed

    def loops(self):
        yield self.outer
        yield from self.holes

    def area(self) -> float:
        return 0.5 * (_loop_area2(self.outer) + sum(_loop_area2(h) for h in self.holes))

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        pts = np.vstack(list(self.loops()))
        return pts.min(axis=0), pts.max(axis=0)

    def boundary_distance_batch(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        best = np.full(len(pts), np.inf)
        for loop in self.loops():
            for i in range(len(loop)):
                a, b = loop[i], loop[(i + 1) % len(loop)]
                np.minimum(best, _segment_distance_batch(pts, a, b), out=best)
        return best

    def contains_batch(self, points: np.ndarray, tol: Tolerance) -> np.ndarray:
        """Classify points: INSIDE / ON_BOUNDARY / OUTSIDE (even-odd rule)."""
        pts = np.atleast_2d(points)
        if abs(_loop_area2(self.outer)) <= 0.0:
            raise GeometryError("degenerate polygon (zero-area loop)")
        inside = _crossings(pts, self.outer)
        for h in self.holes:
            inside ^= _crossings(pts, h)
        res = np.where(inside, INSIDE, OUTSIDE).astype(np.int8)
        near = self.boundary_distance_batch(pts) <= tol.eps_geom
        res[near] = ON_BOUNDARY
        return res

    def contains(self, point, tol: Tolerance) -> int:
        return int(self.contains_batch(np.asarray(point, dtype=float)[None, :], tol)[0])

    def boundary_points(self, spacing: float) -> np.ndarray:
        """Points densified along every loop at roughly the given spacing."""
        chunks = []
        for loop in self.loops():
            for i in range(len(loop)):
                a, b = loop[i], loop[(i + 1) % len(loop)]
                n = max(1, int(math.ceil(np.linalg.norm(b - a) / spacing)))
                t = np.arange(n) / n
                chunks.append(a + t[:, None] * (b - a))
        return np.vstack(chunks)

    def sample_interior(self, rng: np.random.Generator, n: int, tol: Tolerance,
                        max_tries: int = 200) -> np.ndarray:
        lo, hi = self.bbox()
        got = []
        need = n
        for _ in range(max_tries):
            cand = rng.uniform(lo, hi, size=(4 * need, 2))
            cls = self.contains_batch(cand, tol)
            hit = cand[cls == INSIDE]
            if len(hit):
                got.append(hit[:need])
                need -= len(got[-1])
            if need <= 0:
                break
        if need > 0:
            raise GeometryError("could not sample polygon interior (degenerate?)")
        return np.vstack(got)

    def validate(self, tol: Tolerance, full: bool = False) -> None:
        if abs(self.area()) <= tol.eps_geom ** 2:
            raise GeometryError("degenerate polygon (zero area)")
        for h in self.holes:
            if not np.all(_crossings(h, self.outer)):
                raise GeometryError("hole not inside outer loop")
        if full:
            segs = []
            for loop in self.loops():
                for i in range(len(loop)):
                    segs.append((loop[i], loop[(i + 1) % len(loop)]))
            for i in range(len(segs)):
                for j in range(i + 2, len(segs)):
                    a, b = segs[i]
                    c, d = segs[j]
                    if np.allclose(a, d) or np.allclose(b, c):
                        continue
                    if _segments_cross(a, b, c, d):
                        raise GeometryError("self-intersecting loop")


def _segments_cross(a, b, c, d) -> bool:
    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    return (o1 * o2 < 0) and (o3 * o4 < 0)


def point_in_polygon(p, poly: PolygonWithHoles, tol: Tolerance) -> int:
    """Even-odd classification of a 2D point against a polygon-with-holes.

    Returns INSIDE, ON_BOUNDARY (within tol.eps_geom of an edge) or OUTSIDE.
    """
    return poly.contains(p, tol)


def winding_number(p, poly: PolygonWithHoles) -> int:
    """Independent winding-number classifier (used as a test oracle)."""
    total = 0.0
    p = np.asarray(p, dtype=float)
    for loop in poly.loops():
        v = loop - p
        ang = np.arctan2(v[:, 1], v[:, 0])
        d = np.diff(np.concatenate([ang, ang[:1]]))
        d = (d + np.pi) % (2 * np.pi) - np.pi
        total += d.sum()
    return int(round(total / (2 * np.pi)))


@dataclass(frozen=True)
class Interval:
    """Closed interval on a line (the 2D analogue of a face polygon)."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise GeometryError("non-finite interval")
        if self.lo > self.hi:
            lo, hi = float(self.hi), float(self.lo)
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)

    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, t: float, tol: Tolerance) -> int:
        if min(abs(t - self.lo), abs(t - self.hi)) <= tol.eps_geom:
            return ON_BOUNDARY
        return INSIDE if self.lo < t < self.hi else OUTSIDE

    def contains_batch(self, ts: np.ndarray, tol: Tolerance) -> np.ndarray:
        ts = np.asarray(ts, dtype=float).reshape(-1)
        res = np.where((ts > self.lo) & (ts < self.hi), INSIDE, OUTSIDE).astype(np.int8)
        near = np.minimum(np.abs(ts - self.lo), np.abs(ts - self.hi)) <= tol.eps_geom
        res[near] = ON_BOUNDARY
        return res

    def intersect(self, other: "Interval") -> "Interval | None":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else None


@dataclass(frozen=True)
class Box:
    """Axis-aligned box used to bound every arrangement."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo, hi = as_point(self.lo), as_point(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if not np.all(hi - lo > 0):
            raise GeometryError("empty bounding box")

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    def diameter(self) -> float:
        return float(np.linalg.norm(self.hi - self.lo))

    def contains(self, x, slack: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo - slack) and np.all(x <= self.hi + slack))

    def walls(self) -> list[Hyperplane]:
        """Outward-oriented bounding halfplanes (normal . x <= offset holds inside)."""
        out = []
        for k in range(self.dim):
            e = np.zeros(self.dim)
            e[k] = 1.0
            out.append(Hyperplane(e, float(self.hi[k])))
            out.append(Hyperplane(-e, -float(self.lo[k])))
        return out

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(n, self.dim))

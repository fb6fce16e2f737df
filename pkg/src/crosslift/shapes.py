"""Ground-truth solids with analytic membership, normals, sections, medial
data and reach.  These are the oracle side of every experiment.

Primitives are restricted to shapes whose medial axes have closed forms (or
sampled equivalents documented per primitive).  Smoothness is relaxed from
C2 to positive reach: capsules and straight tubes are C^{1,1}, which is what
the reach-based conditions actually consume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    Box,
    GeneralPositionViolation,
    GeometryError,
    Hyperplane,
    Interval,
    PolygonWithHoles,
    Tolerance,
)

INTERNAL = "internal"
EXTERNAL = "external"


@dataclass(frozen=True)
class MedialSample:
    point: np.ndarray
    side: str
    radius: float
    witness: np.ndarray  # boundary point realizing the radius


def _unit(v):
    n = np.linalg.norm(v)
    if n < 1e-15:
        raise GeometryError("zero-length vector")
    return np.asarray(v, dtype=float) / n


# ---------------------------------------------------------------------------
# primitives


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.radius <= 0:
            raise GeometryError("ball radius must be positive")

    @property
    def dim(self):
        return self.center.shape[0]

    def signed_distance(self, pts):
        pts = np.atleast_2d(pts)
        return np.linalg.norm(pts - self.center, axis=1) - self.radius

    def boundary_normals(self, pts):
        pts = np.atleast_2d(pts)
        v = pts - self.center
        return v / np.linalg.norm(v, axis=1)[:, None]

    def boundary_samples(self, rng, n):
        v = rng.normal(size=(n, self.dim))
        v /= np.linalg.norm(v, axis=1)[:, None]
        return self.center + self.radius * v

    def boundary_area(self):
        r = self.radius
        return 4 * math.pi * r * r if self.dim == 3 else 2 * math.pi * r

    def reach(self):
        return self.radius

    def min_curvature_radius(self):
        return self.radius

    def betti(self):
        return (1, 0, 0)

    def bbox(self):
        return self.center - self.radius, self.center + self.radius

    def medial_core(self, side, n, bbox=None):
        if side == INTERNAL:
            w = self.center + self.radius * np.eye(self.dim)[0]
            return [MedialSample(self.center.copy(), INTERNAL, self.radius, w)]
        return []  # external medial axis is at infinity

    def sheet_cuts(self, plane: Hyperplane, rng=None):
        v = float(plane.normal @ self.center - plane.offset)
        return [abs(v) < self.radius]

    def tangency_margin(self, plane: Hyperplane):
        v = float(plane.normal @ self.center - plane.offset)
        return abs(abs(v) - self.radius)

    def section(self, plane, chordal_tol, tol):
        if self.dim == 2:
            return _disk_line_section(self.center, self.radius, plane)
        v = float(plane.normal @ self.center - plane.offset)
        if abs(v) >= self.radius:
            return []
        rho = math.sqrt(self.radius ** 2 - v ** 2)
        c_local = plane.to_local((self.center - v * plane.normal)[None, :])[0]
        return [PolygonWithHoles(_circle_loop(c_local, rho, chordal_tol))]


@dataclass(frozen=True, eq=False)
class Capsule:
    """Segment core thickened by a radius; boundary is C^{1,1}."""

    p: np.ndarray
    q: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        if self.radius <= 0:
            raise GeometryError("capsule radius must be positive")

    @property
    def dim(self):
        return self.p.shape[0]

    def _core_closest(self, pts):
        d = self.q - self.p
        L2 = float(d @ d)
        pts = np.atleast_2d(pts)
        if L2 == 0:
            return np.broadcast_to(self.p, pts.shape)
        t = np.clip(((pts - self.p) @ d) / L2, 0.0, 1.0)
        return self.p + t[:, None] * d

    def signed_distance(self, pts):
        pts = np.atleast_2d(pts)
        return np.linalg.norm(pts - self._core_closest(pts), axis=1) - self.radius

    def boundary_normals(self, pts):
        pts = np.atleast_2d(pts)
        v = pts - self._core_closest(pts)
        return v / np.linalg.norm(v, axis=1)[:, None]

    def boundary_samples(self, rng, n):
        L = float(np.linalg.norm(self.q - self.p))
        r = self.radius
        a_cyl = 2 * math.pi * r * L
        a_caps = 4 * math.pi * r * r
        n_cyl = int(round(n * a_cyl / (a_cyl + a_caps)))
        axis = _unit(self.q - self.p) if L > 0 else np.array([0, 0, 1.0])
        u1, u2 = _perp_frame(axis)
        out = []
        if n_cyl:
            t = rng.uniform(0, 1, n_cyl)
            ang = rng.uniform(0, 2 * math.pi, n_cyl)
            core = self.p + t[:, None] * (self.q - self.p)
            out.append(core + r * (np.cos(ang)[:, None] * u1 + np.sin(ang)[:, None] * u2))
        n_cap = n - n_cyl
        if n_cap:
            v = rng.normal(size=(n_cap, self.dim))
            v /= np.linalg.norm(v, axis=1)[:, None]
            ends = np.where((v @ axis)[:, None] >= 0, self.q, self.p)
            out.append(ends + r * v)
        return np.vstack(out)

    def boundary_area(self):
        L = float(np.linalg.norm(self.q - self.p))
        return 2 * math.pi * self.radius * L + 4 * math.pi * self.radius ** 2

    def reach(self):
        return self.radius  # convex: external medial axis at infinity

    def min_curvature_radius(self):
        return self.radius

    def betti(self):
        return (1, 0, 0)

    def bbox(self):
        lo = np.minimum(self.p, self.q) - self.radius
        hi = np.maximum(self.p, self.q) + self.radius
        return lo, hi

    def medial_core(self, side, n, bbox=None):
        if side != INTERNAL:
            return []
        t = np.linspace(0, 1, max(n, 2))
        pts = self.p + t[:, None] * (self.q - self.p)
        nrm = _perp_frame(_unit(self.q - self.p))[0]
        return [MedialSample(m, INTERNAL, self.radius, m + self.radius * nrm)
                for m in pts]

    def sheet_cuts(self, plane, rng=None):
        vp = float(plane.normal @ self.p - plane.offset)
        vq = float(plane.normal @ self.q - plane.offset)
        lo, hi = min(vp, vq) - self.radius, max(vp, vq) + self.radius
        return [lo < 0 < hi]

    def tangency_margin(self, plane):
        vp = float(plane.normal @ self.p - plane.offset)
        vq = float(plane.normal @ self.q - plane.offset)
        lo, hi = min(vp, vq) - self.radius, max(vp, vq) + self.radius
        return min(abs(lo), abs(hi))

    def section(self, plane, chordal_tol, tol):
        return _traced_section(self, plane, chordal_tol, tol)


@dataclass(frozen=True, eq=False)
class SolidTorus:
    center: np.ndarray
    axis: np.ndarray
    major_radius: float
    minor_radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "axis", _unit(self.axis))
        if not (0 < self.minor_radius < self.major_radius):
            raise GeometryError("torus requires 0 < minor < major radius")

    dim = 3

    def _frame(self):
        return _perp_frame(self.axis)

    def _decompose(self, pts):
        pts = np.atleast_2d(pts)
        v = pts - self.center
        h = v @ self.axis
        radial = v - h[:, None] * self.axis
        rho = np.linalg.norm(radial, axis=1)
        return v, h, radial, rho

    def signed_distance(self, pts):
        _, h, _, rho = self._decompose(pts)
        return np.sqrt((rho - self.major_radius) ** 2 + h ** 2) - self.minor_radius

    def boundary_normals(self, pts):
        pts = np.atleast_2d(pts)
        _, h, radial, rho = self._decompose(pts)
        safe = np.maximum(rho, 1e-15)
        core = self.center + radial / safe[:, None] * self.major_radius
        v = pts - core
        return v / np.linalg.norm(v, axis=1)[:, None]

    def boundary_samples(self, rng, n):
        R, r = self.major_radius, self.minor_radius
        u1, u2 = self._frame()
        out = []
        need = n
        while need > 0:
            theta = rng.uniform(0, 2 * math.pi, 2 * need)
            phi = rng.uniform(0, 2 * math.pi, 2 * need)
            accept = rng.uniform(0, 1, 2 * need) < (R + r * np.cos(phi)) / (R + r)
            theta, phi = theta[accept][:need], phi[accept][:need]
            ring = np.cos(theta)[:, None] * u1 + np.sin(theta)[:, None] * u2
            pts = (self.center + R * ring
                   + r * np.cos(phi)[:, None] * ring
                   + r * np.sin(phi)[:, None] * self.axis)
            out.append(pts)
            need -= len(pts)
        return np.vstack(out)[:n]

    def boundary_area(self):
        return 4 * math.pi ** 2 * self.major_radius * self.minor_radius

    def reach(self):
        return min(self.minor_radius, self.major_radius - self.minor_radius)

    def min_curvature_radius(self):
        return self.minor_radius

    def betti(self):
        return (1, 1, 0)

    def bbox(self):
        e = self.major_radius + self.minor_radius
        return self.center - e, self.center + e

    def medial_core(self, side, n, bbox=None):
        u1, u2 = self._frame()
        if side == INTERNAL:
            th = np.linspace(0, 2 * math.pi, max(n, 4), endpoint=False)
            ring = np.cos(th)[:, None] * u1 + np.sin(th)[:, None] * u2
            core = self.center + self.major_radius * ring
            wit = core + self.minor_radius * ring
            return [MedialSample(c, INTERNAL, self.minor_radius, w)
                    for c, w in zip(core, wit)]
        # external medial axis within reach of the scene: the rotation axis
        if bbox is None:
            span = self.major_radius
            zs = np.linspace(-span, span, max(n, 2))
        else:
            lo = float(np.min((bbox.lo - self.center) @ self.axis))
            hi = float(np.max((bbox.hi - self.center) @ self.axis))
            zs = np.linspace(lo, hi, max(n, 2))
        out = []
        for z in zs:
            m = self.center + z * self.axis
            rad = math.hypot(z, self.major_radius) - self.minor_radius
            core = self.center + self.major_radius * u1
            w = core + _unit(m - core) * self.minor_radius
            out.append(MedialSample(m, EXTERNAL, rad, w))
        return out

    def sheet_cuts(self, plane, rng=None):
        v = float(plane.normal @ self.center - plane.offset)
        w = abs(float(plane.normal @ self.axis))
        rho = math.sqrt(max(1.0 - w * w, 0.0))
        return [abs(v) < self.major_radius * rho + self.minor_radius]

    def tangency_margin(self, plane):
        samples = self.boundary_samples(np.random.default_rng(0), 4096)
        vals = samples @ plane.normal - plane.offset
        return float(np.min(np.abs(vals)))

    def section(self, plane, chordal_tol, tol):
        return _traced_section(self, plane, chordal_tol, tol)


@dataclass(frozen=True, eq=False)
class Tube:
    """Polyline core thickened by a radius.

    Membership, normals and sections work for any simple core.  Medial and
    reach data are only available for straight cores (a bent polyline has a
    crease on the inner side of each bend, hence zero reach); constructing
    one of those is allowed for section/diagnostic purposes only.
    """

    core: np.ndarray  # (k, 3) polyline vertices
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "core", np.asarray(self.core, dtype=float))
        if self.core.ndim != 2 or len(self.core) < 2:
            raise GeometryError("tube core needs at least two points")
        if self.radius <= 0:
            raise GeometryError("tube radius must be positive")

    @property
    def dim(self):
        return self.core.shape[1]

    def is_straight(self, tol=1e-12):
        d = np.diff(self.core, axis=0)
        d = d / np.linalg.norm(d, axis=1)[:, None]
        return bool(np.all(d @ d[0] >= 1 - tol))

    def _segments(self):
        return [Capsule(self.core[i], self.core[i + 1], self.radius)
                for i in range(len(self.core) - 1)]

    def signed_distance(self, pts):
        return np.min(np.stack([s.signed_distance(pts) for s in self._segments()]),
                      axis=0)

    def boundary_normals(self, pts):
        pts = np.atleast_2d(pts)
        ds = np.stack([s.signed_distance(pts) for s in self._segments()])
        best = np.argmin(ds, axis=0)
        segs = self._segments()
        out = np.empty_like(pts)
        for i, s in enumerate(segs):
            m = best == i
            if np.any(m):
                out[m] = s.boundary_normals(pts[m])
        return out

    def boundary_samples(self, rng, n):
        segs = self._segments()
        areas = np.array([s.boundary_area() for s in segs])
        counts = np.maximum(1, (n * areas / areas.sum()).astype(int))
        pts = np.vstack([s.boundary_samples(rng, c) for s, c in zip(segs, counts)])
        keep = self.signed_distance(pts) > -1e-9 * (1 + self.radius)
        return pts[keep][:n]

    def boundary_area(self):
        return sum(s.boundary_area() for s in self._segments())

    def reach(self):
        if not self.is_straight():
            raise GeometryError("reach undefined for bent tube cores (zero reach)")
        return self.radius

    def min_curvature_radius(self):
        return self.radius

    def betti(self):
        return (1, 0, 0)

    def bbox(self):
        return self.core.min(axis=0) - self.radius, self.core.max(axis=0) + self.radius

    def medial_core(self, side, n, bbox=None):
        if not self.is_straight():
            raise GeometryError("medial data only available for straight tube cores")
        return Capsule(self.core[0], self.core[-1], self.radius).medial_core(side, n, bbox)

    def sheet_cuts(self, plane, rng=None):
        vals = self.core @ plane.normal - plane.offset
        return [float(vals.min()) - self.radius < 0 < float(vals.max()) + self.radius]

    def tangency_margin(self, plane):
        vals = self.core @ plane.normal - plane.offset
        lo, hi = float(vals.min()) - self.radius, float(vals.max()) + self.radius
        return min(abs(lo), abs(hi))

    def section(self, plane, chordal_tol, tol):
        return _traced_section(self, plane, chordal_tol, tol)


@dataclass(frozen=True, eq=False)
class Disk2D:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.radius <= 0:
            raise GeometryError("disk radius must be positive")

    dim = 2

    def signed_distance(self, pts):
        pts = np.atleast_2d(pts)
        return np.linalg.norm(pts - self.center, axis=1) - self.radius

    def boundary_normals(self, pts):
        pts = np.atleast_2d(pts)
        v = pts - self.center
        return v / np.linalg.norm(v, axis=1)[:, None]

    def boundary_samples(self, rng, n):
        ang = rng.uniform(0, 2 * math.pi, n)
        return self.center + self.radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)

    def boundary_area(self):
        return 2 * math.pi * self.radius

    def reach(self):
        return self.radius

    def min_curvature_radius(self):
        return self.radius

    def betti(self):
        return (1, 0, 0)

    def bbox(self):
        return self.center - self.radius, self.center + self.radius

    def medial_core(self, side, n, bbox=None):
        if side == INTERNAL:
            w = self.center + np.array([self.radius, 0.0])
            return [MedialSample(self.center.copy(), INTERNAL, self.radius, w)]
        return []

    def sheet_cuts(self, plane, rng=None):
        v = float(plane.normal @ self.center - plane.offset)
        return [abs(v) < self.radius]

    def tangency_margin(self, plane):
        v = float(plane.normal @ self.center - plane.offset)
        return abs(abs(v) - self.radius)

    def section(self, plane, chordal_tol, tol):
        return _disk_line_section(self.center, self.radius, plane)


@dataclass(frozen=True, eq=False)
class Annulus2D:
    center: np.ndarray
    r_inner: float
    r_outer: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if not (0 < self.r_inner < self.r_outer):
            raise GeometryError("annulus requires 0 < r_inner < r_outer")

    dim = 2

    def signed_distance(self, pts):
        pts = np.atleast_2d(pts)
        rho = np.linalg.norm(pts - self.center, axis=1)
        return np.maximum(rho - self.r_outer, self.r_inner - rho)

    def boundary_normals(self, pts):
        pts = np.atleast_2d(pts)
        v = pts - self.center
        rho = np.linalg.norm(v, axis=1)
        mid = 0.5 * (self.r_inner + self.r_outer)
        sign = np.where(rho >= mid, 1.0, -1.0)
        return sign[:, None] * v / rho[:, None]

    def boundary_samples(self, rng, n):
        w = self.r_outer / (self.r_inner + self.r_outer)
        n_out = int(round(n * w))
        ang1 = rng.uniform(0, 2 * math.pi, n_out)
        ang2 = rng.uniform(0, 2 * math.pi, n - n_out)
        prs = [self.center + self.r_outer * np.stack([np.cos(ang1), np.sin(ang1)], axis=1),
               self.center + self.r_inner * np.stack([np.cos(ang2), np.sin(ang2)], axis=1)]
        return np.vstack(prs)

    def boundary_area(self):
        return 2 * math.pi * (self.r_inner + self.r_outer)

    def reach(self):
        return min((self.r_outer - self.r_inner) / 2, self.r_inner)

    def min_curvature_radius(self):
        return self.r_inner

    def betti(self):
        return (1, 1, 0)

    def bbox(self):
        return self.center - self.r_outer, self.center + self.r_outer

    def medial_core(self, side, n, bbox=None):
        if side == INTERNAL:
            mid = 0.5 * (self.r_inner + self.r_outer)
            half = 0.5 * (self.r_outer - self.r_inner)
            th = np.linspace(0, 2 * math.pi, max(n, 4), endpoint=False)
            ring = np.stack([np.cos(th), np.sin(th)], axis=1)
            return [MedialSample(self.center + mid * r, INTERNAL, half,
                                 self.center + self.r_outer * r) for r in ring]
        w = self.center + np.array([self.r_inner, 0.0])
        return [MedialSample(self.center.copy(), EXTERNAL, self.r_inner, w)]

    def sheet_cuts(self, plane, rng=None):
        v = abs(float(plane.normal @ self.center - plane.offset))
        return [v < self.r_outer, v < self.r_inner]

    def tangency_margin(self, plane):
        v = abs(float(plane.normal @ self.center - plane.offset))
        return min(abs(v - self.r_outer), abs(v - self.r_inner))

    def section(self, plane, chordal_tol, tol):
        v = float(plane.normal @ self.center - plane.offset)
        out = _disk_line_section(self.center, self.r_outer, plane)
        if not out or abs(v) >= self.r_inner:
            return out
        inner = _disk_line_section(self.center, self.r_inner, plane)[0]
        outer = out[0]
        return [Interval(outer.lo, inner.lo), Interval(inner.hi, outer.hi)]


@dataclass(frozen=True, eq=False)
class BentSweep:
    """Solid swept between two planes whose slice morphs from a straight bar
    into a circular arch with the same endpoints.

    Slices are tubes of half-width around a 2D core: a segment from
    (-half_len, 0) to (half_len, 0) at the bottom, bending upward with
    sagitta growing linearly to sag_max at the top.  The solid extends past
    [0, morph_height] by a clamped margin on both sides with flat end caps,
    so cutting planes at 0 and morph_height meet it transversally.  Its
    sections on those planes coincide with the ones an arch-shaped ring
    produces, while the solid itself is contractible.
    """

    half_len: float
    half_width: float
    morph_height: float
    sag_max: float
    z_margin: float = 0.15

    dim = 3

    def _sag(self, z):
        t = np.clip(np.asarray(z, dtype=float) / self.morph_height, 0.0, 1.0)
        return self.sag_max * t

    def _core_dist2d(self, xy, sag):
        """Distance from 2D points to the arc through (+-half_len, 0) with the
        given sagitta (vectorized over points; sag may vary per point)."""
        x, y = xy[:, 0], xy[:, 1]
        sag = np.broadcast_to(np.asarray(sag, dtype=float), x.shape)
        out = np.empty_like(x)
        straight = sag < 1e-9 * self.half_len
        if np.any(straight):
            xs = np.clip(x[straight], -self.half_len, self.half_len)
            out[straight] = np.hypot(x[straight] - xs, y[straight])
        b = ~straight
        if np.any(b):
            s = sag[b]
            yc = (s * s - self.half_len ** 2) / (2 * s)
            rad = s - yc
            vx, vy = x[b], y[b] - yc
            vn = np.maximum(np.hypot(vx, vy), 1e-300)
            # nearest circle point is on the arc iff its y-coordinate is
            # nonnegative: yc + rad*vy/|v| >= 0
            in_span = rad * vy >= -yc * vn
            d_arc = np.abs(vn - rad)
            d_end = np.minimum(np.hypot(vx - self.half_len, y[b]),
                               np.hypot(vx + self.half_len, y[b]))
            out[b] = np.where(in_span, d_arc, d_end)
        return out

    def signed_distance(self, pts):
        pts = np.atleast_2d(pts)
        z = pts[:, 2]
        d2 = self._core_dist2d(pts[:, :2], self._sag(z)) - self.half_width
        lo, hi = -self.z_margin, self.morph_height + self.z_margin
        return np.maximum(d2, np.maximum(lo - z, z - hi))

    def boundary_normals(self, pts):
        pts = np.atleast_2d(pts)
        h = 1e-6 * max(self.half_width, 1.0)
        g = np.empty_like(pts)
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            g[:, k] = (self.signed_distance(pts + e) - self.signed_distance(pts - e)) / (2 * h)
        return g / np.linalg.norm(g, axis=1)[:, None]

    def boundary_samples(self, rng, n):
        lo, hi = self.bbox()
        box = Box(lo, hi)
        shell = 0.05 * self.half_width
        got = []
        need = n
        for _ in range(200):
            cand = box.sample(rng, 8 * need)
            sd = self.signed_distance(cand)
            near = np.abs(sd) < shell
            pts = cand[near]
            if len(pts):
                nrm = self.boundary_normals(pts)
                pts = pts - sd[near][:, None] * nrm
                got.append(pts[:need])
                need -= len(got[-1])
            if need <= 0:
                break
        if need > 0:
            raise GeometryError("could not sample sweep boundary")
        return np.vstack(got)

    def boundary_area(self):
        return 2 * math.pi * self.half_width * 2 * self.half_len  # rough weight

    def reach(self):
        raise GeometryError("no analytic reach for the bent sweep (flat caps)")

    def min_curvature_radius(self):
        return self.half_width

    def betti(self):
        return (1, 0, 0)

    def bbox(self):
        L, w = self.half_len, self.half_width
        lo = np.array([-L - w, -w - 0.1 * L, -self.z_margin])
        hi = np.array([L + w, self.sag_max + w + 0.1 * L,
                       self.morph_height + self.z_margin])
        return lo, hi

    def medial_core(self, side, n, bbox=None):
        raise GeometryError("no analytic medial data for the bent sweep")

    def sheet_cuts(self, plane, rng=None):
        rng = rng or np.random.default_rng(0)
        pts = self.boundary_samples(rng, 512)
        vals = pts @ plane.normal - plane.offset
        return [bool(vals.min() < 0 < vals.max())]

    def tangency_margin(self, plane):
        rng = np.random.default_rng(1)
        pts = self.boundary_samples(rng, 2048)
        vals = pts @ plane.normal - plane.offset
        return float(np.min(np.abs(vals)))

    def section(self, plane, chordal_tol, tol):
        return _traced_section(self, plane, chordal_tol, tol)


PRIMITIVE_TYPES = {
    "ball": Ball,
    "capsule": Capsule,
    "solid_torus": SolidTorus,
    "tube": Tube,
    "disk": Disk2D,
    "annulus": Annulus2D,
    "bent_sweep": BentSweep,
}


# ---------------------------------------------------------------------------
# section helpers


def _perp_frame(axis):
    k = int(np.argmin(np.abs(axis)))
    e = np.zeros(3)
    e[k] = 1.0
    u1 = np.cross(axis, e)
    u1 /= np.linalg.norm(u1)
    u2 = np.cross(axis, u1)
    return u1, u2


def _circle_loop(center, radius, chordal_tol):
    err = min(max(chordal_tol, 1e-9), 0.2 * radius)
    n = max(64, int(math.ceil(math.pi / math.acos(1 - err / radius))))
    th = np.linspace(0, 2 * math.pi, n, endpoint=False)
    return center + radius * np.stack([np.cos(th), np.sin(th)], axis=1)


def _disk_line_section(center, radius, plane):
    v = float(plane.normal @ center - plane.offset)
    if abs(v) >= radius:
        return []
    half = math.sqrt(radius * radius - v * v)
    origin, u = plane.basis()
    s0 = float((center - origin) @ u[:, 0])
    return [Interval(s0 - half, s0 + half)]


_MS_SEGMENTS = {
    1: [(3, 0)], 2: [(0, 1)], 3: [(3, 1)], 4: [(1, 2)],
    6: [(0, 2)], 7: [(3, 2)], 8: [(2, 3)], 9: [(2, 0)],
    11: [(2, 1)], 12: [(1, 3)], 13: [(1, 0)], 14: [(0, 3)],
}


def _traced_section(prim, plane: Hyperplane, chordal_tol, tol: Tolerance):
    """Section polygons of a 3D primitive by marching the in-plane zero set
    of its signed distance (squares with linear interpolation)."""
    lo, hi = prim.bbox()
    corners = np.array(np.meshgrid(*zip(lo, hi), indexing="ij")).reshape(3, -1).T
    loc = plane.to_local(corners)

    rho = prim.min_curvature_radius()
    h = math.sqrt(max(8 * chordal_tol * rho, 1e-18))
    h = min(h, rho / 2)
    umin, vmin = float(loc[:, 0].min()) - 2 * h, float(loc[:, 1].min()) - 2 * h
    umax, vmax = float(loc[:, 0].max()) + 2 * h, float(loc[:, 1].max()) + 2 * h
    nu = int(math.ceil((umax - umin) / h)) + 1
    nv = int(math.ceil((vmax - vmin) / h)) + 1
    cap = 700
    if nu > cap or nv > cap:
        scale = max(nu / cap, nv / cap)
        h *= scale
        nu = int(math.ceil((umax - umin) / h)) + 1
        nv = int(math.ceil((vmax - vmin) / h)) + 1
    us = umin + h * np.arange(nu)
    vs = vmin + h * np.arange(nv)
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    world = plane.to_world(np.stack([uu.ravel(), vv.ravel()], axis=1))
    f = prim.signed_distance(world).reshape(nu, nv)

    if np.all(f > 0):
        return []
    fmin_interior = float(np.min(f))
    if -fmin_interior < tol.eps_geom:
        raise GeneralPositionViolation("cutting plane grazes the shape")

    # crossing points on grid edges, keyed so neighbors agree exactly
    def interp(p0, f0, p1, f1):
        t = f0 / (f0 - f1)
        return (p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1]))

    segs = []
    neg = f < 0
    for i in range(nu - 1):
        for j in range(nv - 1):
            idx = (int(neg[i, j]) | (int(neg[i + 1, j]) << 1)
                   | (int(neg[i + 1, j + 1]) << 2) | (int(neg[i, j + 1]) << 3))
            if idx in (0, 15):
                continue
            corners_ = [(us[i], vs[j]), (us[i + 1], vs[j]),
                        (us[i + 1], vs[j + 1]), (us[i], vs[j + 1])]
            fvals = [f[i, j], f[i + 1, j], f[i + 1, j + 1], f[i, j + 1]]
            edge_keys = [("h", i, j), ("v", i + 1, j), ("h", i, j + 1), ("v", i, j)]

            def edge_point(e):
                a, b = e, (e + 1) % 4
                return interp(corners_[a], fvals[a], corners_[b], fvals[b])

            if idx in (5, 10):
                center_val = float(np.mean(fvals))
                if idx == 5:
                    pairs = [(3, 0), (1, 2)] if center_val < 0 else [(3, 2), (1, 0)]
                else:
                    pairs = [(0, 1), (2, 3)] if center_val < 0 else [(0, 3), (2, 1)]
            else:
                pairs = _MS_SEGMENTS[idx]
            for (ea, eb) in pairs:
                segs.append(((edge_keys[ea], edge_point(ea)),
                             (edge_keys[eb], edge_point(eb))))

    # chain segments into closed loops via shared edge keys
    nxt = {}
    pts_of = {}
    for (ka, pa), (kb, pb) in segs:
        nxt[ka] = kb
        pts_of[ka] = pa
        pts_of[kb] = pb
    loops = []
    seen = set()
    for start in list(nxt.keys()):
        if start in seen:
            continue
        loop = []
        k = start
        closed = False
        while True:
            if k in seen:
                closed = k == start and len(loop) >= 3
                break
            seen.add(k)
            loop.append(pts_of[k])
            if k not in nxt:
                break
            k = nxt[k]
        if closed:
            loops.append(np.array(loop))

    if not loops:
        return []
    return _assemble_loops(loops)


def _assemble_loops(loops):
    """Nest disjoint closed loops into polygons-with-holes by containment
    parity (depth-even loops bound material)."""
    from .geometry import PolygonWithHoles as PWH, _crossings

    depth = [0] * len(loops)
    for i in range(len(loops)):
        for j in range(len(loops)):
            if i != j and _crossings(loops[i][:1], loops[j])[0]:
                depth[i] += 1
    parents = [None] * len(loops)
    for i in range(len(loops)):
        best, bd = None, -1
        for j in range(len(loops)):
            if i != j and _crossings(loops[i][:1], loops[j])[0] and depth[j] > bd:
                best, bd = j, depth[j]
        parents[i] = best

    regions = []
    for i in range(len(loops)):
        if depth[i] % 2 == 0:
            holes = [loops[j] for j in range(len(loops))
                     if parents[j] == i and depth[j] == depth[i] + 1]
            regions.append(PWH(loops[i], holes))
    return regions


def _area2(loop):
    x, y = loop[:, 0], loop[:, 1]
    return float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


# ---------------------------------------------------------------------------
# the union shape


@dataclass(eq=False)
class Shape:
    """Disjoint union of primitives: the ground-truth solid."""

    components: list

    def __post_init__(self):
        if not self.components:
            raise GeometryError("shape needs at least one component")
        dims = {c.dim for c in self.components}
        if len(dims) != 1:
            raise GeometryError("mixed component dimensions")

    @property
    def dim(self):
        return self.components[0].dim

    def signed_distance(self, pts):
        return np.min(np.stack([c.signed_distance(pts) for c in self.components]),
                      axis=0)

    def boundary_distance(self, pts):
        """Unsigned distance to the union boundary (components disjoint)."""
        return np.min(np.abs(np.stack([c.signed_distance(pts)
                                       for c in self.components])), axis=0)

    def contains(self, x) -> bool:
        return bool(self.signed_distance(np.asarray(x, dtype=float)[None, :])[0] <= 0)

    def contains_batch(self, pts):
        return self.signed_distance(pts) <= 0

    def boundary_normal(self, a, tol: Tolerance | None = None):
        tol = tol or Tolerance()
        a = np.asarray(a, dtype=float)
        ds = [abs(float(c.signed_distance(a[None, :])[0])) for c in self.components]
        k = int(np.argmin(ds))
        if ds[k] > 100 * tol.eps_geom + 1e-7:
            raise GeometryError("point is not on the shape boundary")
        return self.components[k].boundary_normals(a[None, :])[0]

    def boundary_normals_batch(self, pts):
        pts = np.atleast_2d(pts)
        ds = np.abs(np.stack([c.signed_distance(pts) for c in self.components]))
        owner = np.argmin(ds, axis=0)
        out = np.empty_like(pts)
        for k, c in enumerate(self.components):
            m = owner == k
            if np.any(m):
                out[m] = c.boundary_normals(pts[m])
        return out

    def boundary_samples(self, rng, n):
        areas = np.array([c.boundary_area() for c in self.components])
        counts = np.maximum(1, np.round(n * areas / areas.sum()).astype(int))
        return np.vstack([c.boundary_samples(rng, int(k))
                          for c, k in zip(self.components, counts)])

    def bbox(self) -> Box:
        los, his = zip(*[c.bbox() for c in self.components])
        return Box(np.min(np.stack(los), axis=0), np.max(np.stack(his), axis=0))

    def betti(self):
        b = [0, 0, 0]
        for c in self.components:
            cb = c.betti()
            for k in range(3):
                b[k] += cb[k]
        return tuple(b)

    def validate_disjoint(self, margin: float, rng=None):
        rng = rng or np.random.default_rng(0)
        for i, ci in enumerate(self.components):
            pts = ci.boundary_samples(rng, 512)
            for j, cj in enumerate(self.components):
                if i == j:
                    continue
                if float(np.min(cj.signed_distance(pts))) < margin:
                    raise GeometryError(f"components {i} and {j} closer than margin")

    # -- medial data --------------------------------------------------------

    def medial_samples(self, side: str, n: int, bbox: Box | None = None):
        """Analytic per-primitive medial sets, plus (for unions) sampled
        external sheets between components obtained by normal-ray retraction."""
        out = []
        for c in self.components:
            out.extend(c.medial_core(side, n, bbox))
        if side == EXTERNAL and len(self.components) > 1:
            out.extend(self._pairwise_external_samples(n, bbox))
        if bbox is not None:
            out = [m for m in out if bbox.contains(m.point, slack=0.0)]
        return out

    def _pairwise_external_samples(self, n, bbox):
        rng = np.random.default_rng(12345)
        cap = (bbox.diameter() if bbox is not None else
               float(np.linalg.norm(self.bbox().hi - self.bbox().lo))) * 2.0
        a = self.boundary_samples(rng, max(n, 64))
        nrm = self.boundary_normals_batch(a)
        t = retract_travel(self, a, nrm, cap)
        ok = t < cap * 0.99
        out = []
        for p, d, tv in zip(a[ok], nrm[ok], t[ok]):
            m = p + tv * d
            # keep only genuinely two-sided medial points (bisector sheets)
            probe = self.boundary_distance(m[None, :])[0]
            if abs(probe - tv) <= 1e-6 * max(1.0, tv):
                out.append(MedialSample(m, EXTERNAL, float(tv), p))
        return out

    def reach(self) -> float:
        """min over components, and half the smallest inter-component gap."""
        r = min(c.reach() for c in self.components)
        for i in range(len(self.components)):
            for j in range(i + 1, len(self.components)):
                r = min(r, 0.5 * self._gap(self.components[i], self.components[j]))
        return r

    def _gap(self, a, b) -> float:
        if isinstance(a, (Ball, Disk2D)) and isinstance(b, (Ball, Disk2D)):
            d = float(np.linalg.norm(a.center - b.center))
            return d - a.radius - b.radius
        rng = np.random.default_rng(99)
        pts = a.boundary_samples(rng, 2048)
        return float(np.min(np.abs(b.signed_distance(pts))))

    def reach_in_cell(self, cell, n_samples: int = 1000, rng=None,
                      bbox: Box | None = None) -> float:
        """Sampled localized reach: min d(a, m(a)) over retract pairs with an
        endpoint in the cell.  +inf when no pair touches the cell."""
        if n_samples < 100:
            raise GeometryError("reach_in_cell needs at least 100 samples")
        rng = rng or np.random.default_rng(7)
        cap = (bbox.diameter() if bbox is not None else
               float(np.linalg.norm(self.bbox().hi - self.bbox().lo))) * 2.0
        a = self.boundary_samples(rng, n_samples)
        nrm = self.boundary_normals_batch(a)
        t_int = retract_travel(self, a, -nrm, cap)
        t_ext = retract_travel(self, a, nrm, cap)

        def in_cell(points):
            return np.min(cell.slacks(points), axis=0) >= -1e-12

        best = math.inf
        a_in = in_cell(a)
        for t, sgn in ((t_int, -1.0), (t_ext, 1.0)):
            m = a + sgn * t[:, None] * nrm
            finite = t < cap * 0.99
            relevant = finite & (a_in | in_cell(m))
            if np.any(relevant):
                best = min(best, float(np.min(t[relevant])))
            # external retracts escaping to infinity while a sits in the cell
            if sgn > 0:
                esc = (~finite) & a_in
                # contributes d(a, m(a)) = +inf: no constraint
                _ = esc
        return best

    def reach_sampled(self, n_samples: int = 2000, rng=None) -> float:
        rng = rng or np.random.default_rng(11)
        cap = float(np.linalg.norm(self.bbox().hi - self.bbox().lo)) * 2.0
        a = self.boundary_samples(rng, n_samples)
        nrm = self.boundary_normals_batch(a)
        t_int = retract_travel(self, a, -nrm, cap)
        t_ext = retract_travel(self, a, nrm, cap)
        return float(np.min(np.minimum(t_int, t_ext)))

    # -- sections ------------------------------------------------------------

    def section_of(self, plane: Hyperplane, chordal_tol: float,
                   tol: Tolerance | None = None):
        """Regions of shape-plane intersection, in plane-local coordinates.

        Raises GeneralPositionViolation when the plane is (near-)tangent to
        the boundary."""
        tol = tol or Tolerance()
        out = []
        for c in self.components:
            if c.tangency_margin(plane) <= tol.eps_geom:
                raise GeneralPositionViolation("cutting plane tangent to the shape")
            out.extend(c.section(plane, chordal_tol, tol))
        return out

    def boundary_sheets_cut(self, planes: list[Hyperplane]):
        """Per boundary sheet: is it crossed by at least one cutting plane."""
        results = []
        for ci, c in enumerate(self.components):
            n_sheets = len(c.sheet_cuts(planes[0])) if planes else \
                len(c.sheet_cuts(Hyperplane(np.eye(self.dim)[0], 0.0)))
            cut = [False] * n_sheets
            for p in planes:
                for k, hit in enumerate(c.sheet_cuts(p)):
                    cut[k] = cut[k] or bool(hit)
            results.extend([(ci, k, cut[k]) for k in range(n_sheets)])
        return results


def retract_travel(shape: Shape, points: np.ndarray, dirs: np.ndarray,
                   t_max: float, iters: int = 60, tol_r: float = 1e-12) -> np.ndarray:
    """Max t with d(a + t*dir, boundary) >= t - tol, vectorized bisection.

    This is the medial retract distance along the given rays: the predicate
    holds exactly up to the retract point and fails after (1-Lipschitz
    distance functions make it monotone).
    """
    pts = np.atleast_2d(points)
    scale = max(t_max, 1.0)
    lo = np.zeros(len(pts))
    hi = np.full(len(pts), float(t_max))
    ok_hi = shape.boundary_distance(pts + hi[:, None] * dirs) >= hi - tol_r * scale
    lo[ok_hi] = hi[ok_hi]
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        good = shape.boundary_distance(pts + mid[:, None] * dirs) >= mid - tol_r * scale
        lo = np.where(good, mid, lo)
        hi = np.where(good, hi, mid)
    return lo

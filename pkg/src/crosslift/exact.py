"""Exact rational 2D kernel.

Float inputs are taken at face value (every float is a rational number), and
every derived quantity -- skeleton breakpoints, piece vertices, boundary
cycles of unions -- is computed with exact rational arithmetic.  No epsilon appears
anywhere in this module, which is what makes the 2D reconstruction output and
its topology counts exact.

The union of the reconstruction pieces is never built via a general polygon
clipper.  Pieces are convex, and two pieces only ever overlap along segments
or points, so the boundary of the union is a subset of the pieces' edges.
The algorithm is:

1. split every piece edge at every intersection with other edges (atomic
   segments, deduplicated exactly),
2. for each atomic segment decide, for each side, whether an infinitesimal
   step off the midpoint lands inside some piece (exact, because pieces are
   convex: a.m < c, or a.m = c and a.d <= 0, per halfplane),
3. keep segments with inside on exactly one side, directed so the interior
   is on the left, and
4. walk cycles, turning as sharply clockwise as possible, which splits
   pinch vertices consistently.

Counter-clockwise cycles are outer boundaries, clockwise ones are holes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

try:  # gmpy2 rationals are several times faster on big operands
    from gmpy2 import mpq as RAT
except ImportError:  # pragma: no cover
    RAT = Fraction

FPoint = tuple  # pair of rationals
Halfplane = tuple  # (a, b, c) meaning a*x + b*y <= c


def fr(x):
    return RAT(x)


def fpt(x, y) -> FPoint:
    return (fr(x), fr(y))


def snap(x: float, grid: int = 2 ** 30):
    """Round a float onto a dyadic grid; keeps downstream rationals small."""
    return RAT(round(Fraction(x) * grid), grid)


def cross(o: FPoint, a: FPoint, b: FPoint):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def clip_halfplane(pts: list[FPoint], hp: Halfplane) -> list[FPoint]:
    """Sutherland-Hodgman step: keep the a*x + b*y <= c side of a convex loop."""
    a, b, c = hp
    if not pts:
        return []
    out: list[FPoint] = []
    vals = [a * p[0] + b * p[1] - c for p in pts]
    n = len(pts)
    for i in range(n):
        p, q = pts[i], pts[(i + 1) % n]
        vp, vq = vals[i], vals[(i + 1) % n]
        if vp <= 0:
            out.append(p)
        if (vp < 0 < vq) or (vq < 0 < vp):
            t = vp / (vp - vq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    # collapse exact duplicates introduced by touching vertices
    dedup: list[FPoint] = []
    for p in out:
        if not dedup or p != dedup[-1]:
            dedup.append(p)
    if len(dedup) > 1 and dedup[0] == dedup[-1]:
        dedup.pop()
    return dedup


def convex_from_halfplanes(hps: list[Halfplane], seed: list[FPoint]) -> list[FPoint]:
    pts = list(seed)
    for hp in hps:
        pts = clip_halfplane(pts, hp)
        if not pts:
            return []
    return pts


def loop_area2(pts: list[FPoint]):
    s = RAT(0)
    n = len(pts)
    for i in range(n):
        x1, y1 = pts[i]
        x2, y2 = pts[(i + 1) % n]
        s += x1 * y2 - x2 * y1
    return s


@dataclass
class ConvexPiece:
    """Convex region given by halfplanes, with its exact vertex loop."""

    halfplanes: list[Halfplane]
    vertices: list[FPoint]
    tag: object = None

    @staticmethod
    def build(hps: list[Halfplane], seed: list[FPoint], tag=None) -> "ConvexPiece | None":
        v = convex_from_halfplanes(hps, seed)
        if len(v) < 3 or loop_area2(v) == 0:
            return None
        if loop_area2(v) < 0:
            v = v[::-1]
        return ConvexPiece(hps, v, tag)

    def contains(self, p: FPoint) -> bool:
        return all(a * p[0] + b * p[1] <= c for a, b, c in self.halfplanes)

    def contains_offset(self, m: FPoint, d: FPoint) -> bool:
        """Whether m + eps*d lies inside for every small enough eps > 0."""
        for a, b, c in self.halfplanes:
            v = a * m[0] + b * m[1] - c
            if v > 0:
                return False
            if v == 0 and a * d[0] + b * d[1] > 0:
                return False
        return True

    def edges(self):
        n = len(self.vertices)
        for i in range(n):
            yield self.vertices[i], self.vertices[(i + 1) % n]

    def bbox(self):
        xs = [p[0] for p in self.vertices]
        ys = [p[1] for p in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def intersects(self, other: "ConvexPiece") -> bool:
        v = convex_from_halfplanes(other.halfplanes, self.vertices)
        if v:
            return True
        # clipping drops measure-zero touches, so check vertex containment
        return any(other.contains(p) for p in self.vertices) or any(
            self.contains(p) for p in other.vertices
        )


def _param_on_segment(u: FPoint, v: FPoint, p: FPoint):
    dx, dy = v[0] - u[0], v[1] - u[1]
    if abs(dx) >= abs(dy):
        return (p[0] - u[0]) / dx
    return (p[1] - u[1]) / dy


def segment_cut_params(u: FPoint, v: FPoint, r: FPoint, s: FPoint) -> list:
    """Parameters t in (0,1) where [u,v] is cut by segment [r,s] (exact).

    Collinear overlaps contribute the projections of r and s; proper and
    endpoint crossings contribute the single intersection parameter.
    """
    d1 = cross(u, v, r)
    d2 = cross(u, v, s)
    if d1 == 0 and d2 == 0:
        out = []
        for p in (r, s):
            t = _param_on_segment(u, v, p)
            if 0 < t < 1:
                out.append(t)
        return out
    if (d1 > 0 and d2 > 0) or (d1 < 0 and d2 < 0):
        return []
    d3 = cross(r, s, u)
    d4 = cross(r, s, v)
    if (d3 > 0 and d4 > 0) or (d3 < 0 and d4 < 0):
        return []
    denom = d1 - d2
    if denom == 0:
        return []
    # intersection point parameter along [u, v]
    t = d3 / (d3 - d4)
    if 0 < t < 1:
        return [t]
    return []


def _point_at(u: FPoint, v: FPoint, t) -> FPoint:
    return (u[0] + t * (v[0] - u[0]), u[1] + t * (v[1] - u[1]))


def _dir_key(d: FPoint):
    """Total order of directions by CCW angle from +x axis, exact."""
    x, y = d
    if y > 0 or (y == 0 and x > 0):
        half = 0
    else:
        half = 1
    return half, (-x, y) if half == 0 else (x, -y)


def _ccw_compare(base: FPoint, d1: FPoint, d2: FPoint) -> int:
    """Compare CCW angles of d1, d2 measured from base direction (exact)."""

    def sector(d):
        c = base[0] * d[1] - base[1] * d[0]
        dot = base[0] * d[0] + base[1] * d[1]
        if c == 0 and dot > 0:
            return 0
        if c > 0:
            return 1
        if c == 0 and dot < 0:
            return 2
        return 3

    s1, s2 = sector(d1), sector(d2)
    if s1 != s2:
        return -1 if s1 < s2 else 1
    c = d1[0] * d2[1] - d1[1] * d2[0]
    if c > 0:
        return -1
    if c < 0:
        return 1
    return 0


def union_boundary(pieces: list[ConvexPiece]) -> list[list[FPoint]]:
    """Boundary cycles of the union of convex pieces, exactly.

    Returns closed vertex loops; positive (CCW) loops bound material,
    negative (CW) loops bound holes.
    """
    import numpy as _np

    edges: list[tuple[FPoint, FPoint]] = []
    for pc in pieces:
        edges.extend(pc.edges())
    if not edges:
        return []

    # float bounding boxes drive all-pairs pruning; exact math decides
    ebox = _np.array([[float(min(u[0], v[0])), float(min(u[1], v[1])),
                       float(max(u[0], v[0])), float(max(u[1], v[1]))]
                      for u, v in edges])
    pbox = _np.array([[float(b) for b in pc.bbox()] for pc in pieces])
    slop = 1e-9 * (1.0 + float(_np.max(_np.abs(ebox))))

    atomics: set[tuple[FPoint, FPoint]] = set()
    for i, (u, v) in enumerate(edges):
        overlap = ~((ebox[:, 2] < ebox[i, 0] - slop) |
                    (ebox[:, 0] > ebox[i, 2] + slop) |
                    (ebox[:, 3] < ebox[i, 1] - slop) |
                    (ebox[:, 1] > ebox[i, 3] + slop))
        overlap[i] = False
        cuts = {RAT(0), RAT(1)}
        for j in _np.nonzero(overlap)[0]:
            r, s = edges[j]
            cuts.update(segment_cut_params(u, v, r, s))
        ts = sorted(cuts)
        for a, b in zip(ts[:-1], ts[1:]):
            p, q = _point_at(u, v, a), _point_at(u, v, b)
            if p == q:
                continue
            atomics.add((p, q) if (p < q) else (q, p))

    directed: list[tuple[FPoint, FPoint]] = []
    atomics_list = sorted(atomics)
    mids = _np.array([[float((p[0] + q[0]) / 2), float((p[1] + q[1]) / 2)]
                      for p, q in atomics_list])
    for (p, q), mid in zip(atomics_list, mids):
        near = _np.nonzero((pbox[:, 0] <= mid[0] + slop) &
                           (pbox[:, 2] >= mid[0] - slop) &
                           (pbox[:, 1] <= mid[1] + slop) &
                           (pbox[:, 3] >= mid[1] - slop))[0]
        if len(near) == 0:
            continue
        mx = ((p[0] + q[0]) / 2, (p[1] + q[1]) / 2)
        d = (q[0] - p[0], q[1] - p[1])
        left = (-d[1], d[0])
        right = (d[1], -d[0])
        in_left = any(pieces[k].contains_offset(mx, left) for k in near)
        in_right = any(pieces[k].contains_offset(mx, right) for k in near)
        if in_left == in_right:
            continue
        directed.append((p, q) if in_left else (q, p))

    outgoing: dict[FPoint, list[int]] = {}
    for idx, (p, q) in enumerate(directed):
        outgoing.setdefault(p, []).append(idx)

    used = [False] * len(directed)
    cycles: list[list[FPoint]] = []
    for start in range(len(directed)):
        if used[start]:
            continue
        cycle = []
        cur = start
        broken = False
        while not used[cur]:
            used[cur] = True
            p, q = directed[cur]
            cycle.append(p)
            rev = (p[0] - q[0], p[1] - q[1])
            cands = outgoing.get(q, [])
            if not cands:
                broken = True
                break
            # the vertex pairing incoming -> outgoing is a permutation, so
            # consider every outgoing edge; cycles close on their own
            best = None
            for k in cands:
                dk = (directed[k][1][0] - q[0], directed[k][1][1] - q[1])
                if best is None or _ccw_compare(rev, dk, best[1]) > 0:
                    # largest CCW angle from rev = sharpest clockwise turn
                    best = (k, dk)
            cur = best[0]
        if not broken and cur == start and len(cycle) >= 3:
            cycles.append(cycle)
    return cycles


def _point_strictly_inside_loop(p: FPoint, loop: list[FPoint]) -> bool:
    """Exact even-odd test; points on the loop return False."""
    n = len(loop)
    inside = False
    px, py = p
    for i in range(n):
        a, b = loop[i], loop[(i + 1) % n]
        if cross(a, b, p) == 0 and min(a[0], b[0]) <= px <= max(a[0], b[0]) \
                and min(a[1], b[1]) <= py <= max(a[1], b[1]):
            return False
        if (a[1] > py) != (b[1] > py):
            xin = a[0] + (py - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            if px < xin:
                inside = not inside
    return inside


@dataclass
class ExactRegion:
    """One connected component of a union: outer loop(s) + holes.

    Several outer loops appear only at pinch vertices (loops sharing a
    vertex), where the point-set is still connected.
    """

    outers: list[list[FPoint]]
    holes: list[list[FPoint]]

    def hole_count(self) -> int:
        return len(self.holes)


def assemble_regions(cycles: list[list[FPoint]]) -> list[ExactRegion]:
    outers = [c for c in cycles if loop_area2(c) > 0]
    holes = [c for c in cycles if loop_area2(c) < 0]

    # union-find over outer loops that share a vertex (pinched components)
    parent = list(range(len(outers)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    seen: dict[FPoint, int] = {}
    for i, c in enumerate(outers):
        for p in c:
            if p in seen:
                a, b = find(i), find(seen[p])
                if a != b:
                    parent[a] = b
            else:
                seen[p] = i

    groups: dict[int, ExactRegion] = {}
    for i, c in enumerate(outers):
        groups.setdefault(find(i), ExactRegion([], [])).outers.append(c)

    for h in holes:
        # assign to the smallest-area outer loop strictly containing it
        best = None
        for i, c in enumerate(outers):
            if any(_point_strictly_inside_loop(q, c) for q in h[:4]):
                a2 = loop_area2(c)
                if best is None or a2 < best[1]:
                    best = (i, a2)
        if best is None:
            raise ValueError("hole cycle not contained in any outer cycle")
        groups[find(best[0])].holes.append(h)
    return list(groups.values())


def union_regions(pieces: list[ConvexPiece]) -> list[ExactRegion]:
    return assemble_regions(union_boundary(pieces))


def nerve_euler(pieces: list[ConvexPiece], max_simplices: int = 200000) -> int:
    """Euler characteristic of the union via the nerve of the convex pieces.

    All nonempty intersections of convex sets are convex, hence contractible,
    so the nerve has the homotopy type of the union.  Simplices are
    enumerated by DFS with exact common-intersection pruning.
    """
    n = len(pieces)
    chi = 0
    count = 0
    stack: list[tuple[int, list[FPoint]]] = []

    def dfs(last: int, region: list[FPoint], depth: int):
        nonlocal chi, count
        chi += 1 if depth % 2 == 1 else -1
        count += 1
        if count > max_simplices:
            raise RuntimeError("nerve too large")
        for j in range(last + 1, n):
            sub = convex_from_halfplanes(pieces[j].halfplanes, region)
            if not sub:
                # clipping loses measure-zero touches; recheck via vertices
                if not any(pieces[j].contains(p) for p in region):
                    continue
                sub = [p for p in region if pieces[j].contains(p)]
                if not sub:
                    continue
            dfs(j, sub, depth + 1)

    for i in range(n):
        dfs(i, pieces[i].vertices, 1)
    return chi


def components_by_intersection(pieces: list[ConvexPiece]) -> list[list[int]]:
    """Connected components of the piece-intersection graph (exact)."""
    n = len(pieces)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    boxes = [p.bbox() for p in pieces]
    for i, j in itertools.combinations(range(n), 2):
        bi, bj = boxes[i], boxes[j]
        if bj[2] < bi[0] or bj[0] > bi[2] or bj[3] < bi[1] or bj[1] > bi[3]:
            continue
        if find(i) != find(j) and pieces[i].intersects(pieces[j]):
            parent[find(i)] = find(j)
    comps: dict[int, list[int]] = {}
    for i in range(n):
        comps.setdefault(find(i), []).append(i)
    return list(comps.values())


def lower_envelope(lines: list[tuple], s0, s1, eps=0):
    """Lower envelope of lines t(s) = m*s + b over [s0, s1].

    Works for Fraction (eps=0, exact) and float inputs alike.  Returns
    breakpoints [(s, value, line_index)] including both endpoints; the active
    line between consecutive breakpoints is the index stored on the left one.
    """
    if s1 < s0:
        raise ValueError("empty interval")
    vals0 = [m * s0 + b for m, b in lines]
    lo = min(vals0)
    active = min(
        (i for i in range(len(lines)) if vals0[i] <= lo + eps),
        key=lambda i: lines[i][0],
    )
    s = s0
    out = [(s0, vals0[active], active)]
    guard = 0
    while True:
        guard += 1
        if guard > 10 * len(lines) + 10:
            raise RuntimeError("envelope failed to terminate")
        ma, ba = lines[active]
        best = None
        for i, (m, b) in enumerate(lines):
            if i == active or m >= ma:
                continue
            denom = ma - m
            sx = (b - ba) / denom
            if sx <= s + eps or sx > s1:
                continue
            if best is None or sx < best[0] or (sx == best[0] and m < lines[best[1]][0]):
                best = (sx, i)
        if best is None:
            out.append((s1, ma * s1 + ba, active))
            return out
        s, active = best
        out.append((s, lines[active][0] * s + lines[active][1], active))

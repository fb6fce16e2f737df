"""Deterministic scene generators for the verification suites.

The guarantee suites need plane sets that actually satisfy the sampling
conditions, which takes some care:

* Density-condition cages are axis stacks spanning the whole bounding box,
  spaced below twice the reach, plus optional oblique extras (adding planes
  only shrinks cells, so extras never break the condition).

* Transversality-condition cages must also cap the angle between every
  plane and the boundary normals along its contours.  For a ball, planes
  may cross only within 0.6 r of the center (contour sine <= 0.6) and must
  then jump past the near-tangent zone; cells in the jump shadow stay flat
  because the other axes remain dense, and the all-axes-jumped corner cells
  contain neither boundary nor contours (0.6 > 1/sqrt(3) means no contour
  point has all coordinates past the crossing cap), so they are vacuous.
  Capsules behave like balls with a free direction along the core.

Every generated scene is verified by the actual checkers before being
returned; generation retries deterministically with re-jittered offsets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arrangement import build_arrangement
from .conditions import evaluate_conditions
from .geometry import Box, GeometryError, Hyperplane, Tolerance
from .scene import MODE_CONVEX, MODE_STANDARD, Scene
from .shapes import Annulus2D, Ball, BentSweep, Capsule, Disk2D, Shape, SolidTorus


class SceneGenerationError(RuntimeError):
    pass


def _axis_plane(dim: int, axis: int, offset: float) -> Hyperplane:
    n = np.zeros(dim)
    n[axis] = 1.0
    return Hyperplane(n, float(offset))


def _span_fill(lo: float, hi: float, spacing: float, phase: float) -> list[float]:
    """Lattice offsets covering [lo, hi] at the given spacing and phase."""
    k0 = math.floor((lo - phase) / spacing)
    out = []
    k = k0
    while phase + k * spacing < hi:
        v = phase + k * spacing
        if v > lo:
            out.append(v)
        k += 1
    return out


def _dedupe(offsets: list[float], min_gap: float) -> list[float]:
    out: list[float] = []
    for v in sorted(offsets):
        if not out or v - out[-1] > min_gap:
            out.append(v)
    return out


def _nudged(offsets: list[float], shape: Shape, dim: int, axis: int,
            margin: float, step: float, tries: int = 9) -> list[float]:
    """Shift offsets off near-tangent positions, deterministically."""
    out = []
    for off in offsets:
        v = off
        for t in range(tries):
            plane = _axis_plane(dim, axis, v)
            if min(c.tangency_margin(plane) for c in shape.components) > margin:
                break
            v = off + step * (t + 1) * (1 if t % 2 == 0 else -1)
        out.append(v)
    return out


# ---------------------------------------------------------------------------
# density-condition scenes


def c1_cage(shape: Shape, bbox: Box, spacing: float, rng: np.random.Generator,
            margin: float | None = None) -> list[Hyperplane]:
    dim = bbox.dim
    margin = margin if margin is not None else 0.05 * spacing
    planes = []
    for axis in range(dim):
        phase = float(rng.uniform(0, spacing))
        offs = _span_fill(float(bbox.lo[axis]) + 0.2 * spacing,
                          float(bbox.hi[axis]) - 0.2 * spacing, spacing,
                          float(bbox.lo[axis]) + phase)
        offs = _nudged(offs, shape, dim, axis, margin, 0.17 * spacing)
        offs = _dedupe(offs, 0.3 * spacing)
        planes.extend(_axis_plane(dim, axis, o) for o in offs)
    return planes


def random_oblique(shape: Shape, bbox: Box, count: int,
                   rng: np.random.Generator, margin: float) -> list[Hyperplane]:
    out = []
    center = 0.5 * (bbox.lo + bbox.hi)
    tries = 0
    while len(out) < count and tries < 50 * max(count, 1):
        tries += 1
        n = rng.normal(size=bbox.dim)
        n /= np.linalg.norm(n)
        off = float(n @ center + rng.uniform(-0.3, 0.3) * bbox.diameter())
        plane = Hyperplane(n, off)
        if min(c.tangency_margin(plane) for c in shape.components) > margin:
            out.append(plane)
    return out


def make_2d_scene(seed: int, verify: bool = True) -> Scene:
    """1-3 disjoint disks/annuli with a density-passing line set."""
    rng = np.random.default_rng([seed, 101])
    for attempt in range(12):
        comps = _sample_2d_components(rng)
        shape = Shape(comps)
        reach = shape.reach()
        b = shape.bbox()
        m = 0.8 * reach
        bbox = Box(b.lo - m, b.hi + m)
        spacing = 1.1 * reach
        # grazing cuts leave slivers thinner than the verification grids;
        # keep every crossing at least a quarter reach deep
        planes = c1_cage(shape, bbox, spacing, rng, margin=0.28 * reach)
        planes.extend(random_oblique(shape, bbox, int(rng.integers(0, 3)), rng,
                                     margin=0.28 * reach))
        scene = Scene(dim=2, shape=shape, planes=planes, bbox=bbox, seed=seed,
                      reach_lower_bound=reach)
        if not verify or _passes_c1(scene):
            return scene
    raise SceneGenerationError(f"2D scene generation failed for seed {seed}")


def _sample_2d_components(rng) -> list:
    n = int(rng.integers(1, 4))
    comps: list = []
    tries = 0
    while len(comps) < n and tries < 200:
        tries += 1
        kind = rng.choice(["disk", "annulus"])
        c = rng.uniform(-1.2, 1.2, size=2)
        if kind == "disk":
            cand = Disk2D(c, float(rng.uniform(0.45, 0.8)))
        else:
            r_in = float(rng.uniform(0.35, 0.55))
            cand = Annulus2D(c, r_in, r_in + float(rng.uniform(0.55, 0.9)))
        lo, hi = cand.bbox()
        ok = True
        for other in comps:
            lo2, hi2 = other.bbox()
            gap = np.max(np.maximum(lo - hi2, lo2 - hi))
            if gap < 0.65:  # keep reach from degenerating via tiny clearances
                ok = False
                break
        if ok:
            comps.append(cand)
    if not comps:
        comps.append(Disk2D(np.zeros(2), 0.7))
    return comps


def _passes_c1(scene: Scene) -> bool:
    tol = scene.effective_tol()
    try:
        arr = build_arrangement(scene.planes, scene.effective_bbox(), tol)
        secs = scene.build_sections(scene.planes, tol)
        rep = evaluate_conditions(scene.shape, arr, secs, n_samples=1500,
                                  reach_lower_bound=scene.reach_lower_bound,
                                  tol=tol, separation_samples=0)
    except GeometryError:
        return False
    return rep.all_c1


def make_3d_c1_scene(seed: int, verify: bool = True) -> Scene:
    """Balls, tori and capsules with a density-passing 3-axis cage."""
    rng = np.random.default_rng([seed, 301])
    for attempt in range(12):
        comps = _sample_3d_components(rng)
        shape = Shape(comps)
        reach = shape.reach()
        b = shape.bbox()
        m = 0.7 * reach
        bbox = Box(b.lo - m, b.hi + m)
        spacing = 1.0 * reach
        planes = c1_cage(shape, bbox, spacing, rng, margin=0.28 * reach)
        scene = Scene(dim=3, shape=shape, planes=planes, bbox=bbox, seed=seed,
                      reach_lower_bound=reach)
        if not verify or _passes_c1(scene):
            return scene
    raise SceneGenerationError(f"3D C1 scene generation failed for seed {seed}")


def _sample_3d_components(rng) -> list:
    kind = rng.choice(["ball", "two_balls", "torus", "capsule", "ball_torus"])
    if kind == "ball":
        return [Ball(rng.uniform(-0.3, 0.3, 3), float(rng.uniform(0.5, 0.8)))]
    if kind == "two_balls":
        r1 = float(rng.uniform(0.45, 0.65))
        r2 = float(rng.uniform(0.45, 0.65))
        gap = float(rng.uniform(1.0, 1.5))
        d = r1 + r2 + gap
        axis = rng.integers(0, 3)
        c1 = rng.uniform(-0.2, 0.2, 3)
        c2 = c1.copy()
        c2[axis] += d
        return [Ball(c1, r1), Ball(c2, r2)]
    if kind == "torus":
        rmin = float(rng.uniform(0.3, 0.4))
        rmaj = float(rng.uniform(2.2, 2.8)) * rmin
        axis = np.zeros(3)
        axis[rng.integers(0, 3)] = 1.0
        return [SolidTorus(rng.uniform(-0.2, 0.2, 3), axis, rmaj, rmin)]
    if kind == "capsule":
        r = float(rng.uniform(0.4, 0.6))
        axis = np.zeros(3)
        axis[rng.integers(0, 3)] = 1.0
        c = rng.uniform(-0.2, 0.2, 3)
        half = float(rng.uniform(0.5, 0.9))
        return [Capsule(c - half * axis, c + half * axis, r)]
    rmin = float(rng.uniform(0.3, 0.38))
    rmaj = 2.4 * rmin
    c1 = np.array([0.0, 0.0, 0.0])
    ball_r = float(rng.uniform(0.45, 0.6))
    c2 = np.array([rmaj + rmin + ball_r + float(rng.uniform(1.0, 1.4)), 0.0, 0.0])
    return [SolidTorus(c1, np.array([0.0, 0.0, 1.0]), rmaj, rmin),
            Ball(c2, ball_r)]


# ---------------------------------------------------------------------------
# transversality-condition scenes


SINE_CAP = 0.6  # crossing offsets stay within this contour sine


SINE_LAST = 0.595  # outermost crossing sine: above 1/sqrt(3), below the cap


def _outer_fill(lo_end: float, hi_end: float, lo: float, hi: float,
                step: float) -> list[float]:
    out = []
    v = hi_end + step
    while v < hi - 0.1 * step:
        out.append(v)
        v += step
    v = lo_end - step
    while v > lo + 0.1 * step:
        out.append(v)
        v -= step
    return out


def _ball_axis_offsets(center_k: float, radius: float, reach: float,
                       lo: float, hi: float) -> list[float]:
    """Per-axis plane offsets for a ball under the crossing-angle cap.

    Crossings are pinned to end exactly at SINE_LAST * radius: past
    1/sqrt(3) no contour point can have every coordinate beyond the last
    crossing, so the all-jumped corner cells stay contour-free (they hold
    no boundary at all and pass vacuously).  Spacing shrinks with the
    global reach so cell heights stay under the threshold."""
    target = SINE_LAST * radius
    steps = max(2, int(math.ceil(target / min(SINE_CAP / 2 * radius, 0.3 * reach))))
    s_inner = target / steps
    inner = [center_k + j * s_inner for j in range(-steps, steps + 1)]
    jump = [center_k - 1.06 * radius, center_k + 1.06 * radius]
    outer = _outer_fill(center_k - 1.06 * radius, center_k + 1.06 * radius,
                        lo, hi, 0.45 * reach)
    return inner + jump + outer


def _capsule_axis_offsets(p_k: float, q_k: float, radius: float, reach: float,
                          lo: float, hi: float) -> list[float]:
    a, b = min(p_k, q_k), max(p_k, q_k)
    if b - a < 1e-9:
        return _ball_axis_offsets(a, radius, reach, lo, hi)
    span = (b - a) + 2 * SINE_LAST * radius
    steps = max(2, int(math.ceil(span / min(SINE_CAP / 2 * radius, 0.3 * reach))))
    s_inner = span / steps
    body = [a - SINE_LAST * radius + k * s_inner for k in range(steps + 1)]
    jump = [a - 1.06 * radius, b + 1.06 * radius]
    outer = _outer_fill(a - 1.06 * radius, b + 1.06 * radius, lo, hi,
                        0.45 * reach)
    return body + jump + outer


def _axis_window(comp, axis: int, offset: float) -> str:
    """Classify a candidate axis-plane offset against one component:
    'miss', 'allowed' (crossing under the sine cap), or 'forbidden'."""
    m = 0.02
    if isinstance(comp, Ball):
        d = abs(offset - float(comp.center[axis]))
        if d >= comp.radius * (1 + m):
            return "miss"
        return "allowed" if d <= SINE_CAP * comp.radius else "forbidden"
    if isinstance(comp, Capsule):
        a = min(float(comp.p[axis]), float(comp.q[axis]))
        b = max(float(comp.p[axis]), float(comp.q[axis]))
        if offset <= a - comp.radius * (1 + m) or offset >= b + comp.radius * (1 + m):
            return "miss"
        if a - SINE_CAP * comp.radius <= offset <= b + SINE_CAP * comp.radius:
            return "allowed"
        return "forbidden"
    return "forbidden"


def c2_cage(shape: Shape, bbox: Box) -> list[Hyperplane]:
    reach = shape.reach()
    planes = []
    for axis in range(3):
        offs: list[float] = []
        for comp in shape.components:
            if isinstance(comp, Ball):
                offs.extend(_ball_axis_offsets(float(comp.center[axis]),
                                               comp.radius, reach,
                                               float(bbox.lo[axis]),
                                               float(bbox.hi[axis])))
            elif isinstance(comp, Capsule):
                offs.extend(_capsule_axis_offsets(float(comp.p[axis]),
                                                  float(comp.q[axis]),
                                                  comp.radius, reach,
                                                  float(bbox.lo[axis]),
                                                  float(bbox.hi[axis])))
            else:
                raise SceneGenerationError(
                    "transversality cages support balls and capsules")
        offs = [o for o in offs if bbox.lo[axis] + 0.02 < o < bbox.hi[axis] - 0.02]
        # every plane must miss each component or cross it under the cap;
        # components are placed so this never drops a pinned crossing, only
        # outer fill that strayed into another component's grazing zone
        offs = [o for o in offs
                if all(_axis_window(c, axis, o) != "forbidden"
                       for c in shape.components)]
        offs = _dedupe(offs, 0.04 * reach)
        planes.extend(_axis_plane(3, axis, o) for o in offs)
    return planes


def make_3d_c2_scene(seed: int, verify: bool = True) -> Scene:
    """Balls and capsules with a transversality-passing cage."""
    rng = np.random.default_rng([seed, 302])
    for attempt in range(10):
        kind = rng.choice(["ball", "two_balls", "capsule"])
        if kind == "ball":
            comps = [Ball(rng.uniform(-0.25, 0.25, 3),
                          float(rng.uniform(0.5, 0.75)))]
        elif kind == "two_balls":
            r1 = float(rng.uniform(0.5, 0.62))
            r2 = float(rng.uniform(0.5, 0.62))
            # diagonal separation: with every axis gap past both near-tangent
            # zones, the two crossing patterns never interfere
            d = 1.06 * (r1 + r2) + float(rng.uniform(0.12, 0.3))
            signs = rng.choice([-1.0, 1.0], size=3)
            c1 = rng.uniform(-0.15, 0.15, 3)
            c2 = c1 + signs * d
            comps = [Ball(c1, r1), Ball(c2, r2)]
        else:
            r = float(rng.uniform(0.5, 0.65))
            axis = np.zeros(3)
            axis[int(rng.integers(0, 3))] = 1.0
            c = rng.uniform(-0.2, 0.2, 3)
            half = float(rng.uniform(0.45, 0.8))
            comps = [Capsule(c - half * axis, c + half * axis, r)]
        shape = Shape(comps)
        reach = shape.reach()
        b = shape.bbox()
        m = 0.55 * reach
        bbox = Box(b.lo - m, b.hi + m)
        try:
            planes = c2_cage(shape, bbox)
        except SceneGenerationError:
            continue
        scene = Scene(dim=3, shape=shape, planes=planes, bbox=bbox, seed=seed,
                      reach_lower_bound=reach)
        if not verify or _passes_c2(scene):
            return scene
    raise SceneGenerationError(f"3D C2 scene generation failed for seed {seed}")


def _passes_c2(scene: Scene) -> bool:
    tol = scene.effective_tol()
    try:
        arr = build_arrangement(scene.planes, scene.effective_bbox(), tol)
        secs = scene.build_sections(scene.planes, tol)
        rep = evaluate_conditions(scene.shape, arr, secs, n_samples=2000,
                                  reach_lower_bound=scene.reach_lower_bound,
                                  tol=tol, separation_samples=0)
    except GeometryError:
        return False
    return rep.all_c2


def make_convex_scene(seed: int, verify: bool = True) -> Scene:
    """2-4 disjoint balls with a density-passing cage, convex-bodies mode."""
    rng = np.random.default_rng([seed, 401])
    for attempt in range(12):
        n = int(rng.integers(2, 5))
        comps: list = []
        tries = 0
        while len(comps) < n and tries < 300:
            tries += 1
            r = float(rng.uniform(0.45, 0.7))
            c = rng.uniform(-1.5, 1.5, 3)
            ok = all(np.linalg.norm(c - o.center) > r + o.radius + 0.8
                     for o in comps)
            if ok:
                comps.append(Ball(c, r))
        if len(comps) < 2:
            continue
        shape = Shape(comps)
        reach = shape.reach()
        b = shape.bbox()
        bbox = Box(b.lo - 0.7 * reach, b.hi + 0.7 * reach)
        planes = c1_cage(shape, bbox, 1.0 * reach, rng, margin=0.28 * reach)
        scene = Scene(dim=3, mode=MODE_CONVEX, shape=shape, planes=planes,
                      bbox=bbox, seed=seed, reach_lower_bound=reach)
        if not verify or _passes_c1(scene):
            return scene
    raise SceneGenerationError(f"convex scene generation failed for seed {seed}")


# ---------------------------------------------------------------------------
# the ambiguous-sections counterexample pair


AMBIG_HALF_LEN = 1.0
AMBIG_HALF_WIDTH = 0.22
AMBIG_HEIGHT = 0.6
AMBIG_SAG = 0.9
AMBIG_ZMARGIN = 0.18


def ambiguous_truth_shape() -> Shape:
    return Shape([BentSweep(half_len=AMBIG_HALF_LEN, half_width=AMBIG_HALF_WIDTH,
                            morph_height=AMBIG_HEIGHT, sag_max=AMBIG_SAG,
                            z_margin=AMBIG_ZMARGIN)])


def ambiguous_planes() -> list[Hyperplane]:
    return [Hyperplane(np.array([0.0, 0.0, 1.0]), 0.0),
            Hyperplane(np.array([0.0, 0.0, 1.0]), AMBIG_HEIGHT)]


def ambiguous_bbox() -> Box:
    return Box(np.array([-1.75, -0.95, -0.75]), np.array([1.75, 1.75, 1.35]))


def make_ambiguous_truth_scene() -> Scene:
    return Scene(dim=3, shape=ambiguous_truth_shape(), planes=ambiguous_planes(),
                 bbox=ambiguous_bbox(), seed=0, grid_resolution=0.055,
                 chordal_tol=0.004)


def make_ambiguous_sections_scene() -> Scene:
    """Explicit-sections variant: the same two plane sections with no ground
    truth attached.  The nearest-point reconstruction bridges the bar to the
    arch at both ends, producing a solid ring."""
    shape = ambiguous_truth_shape()
    planes = ambiguous_planes()
    tol = Tolerance.for_diameter(ambiguous_bbox().diameter())
    sections = []
    bases = []
    for i, p in enumerate(planes):
        origin, axes = p.basis()
        bases.append({"origin": [round(v, 9) for v in origin],
                      "axes": [[round(v, 9) for v in row] for row in axes]})
        regs = shape.section_of(p, 0.004, tol)
        polys = []
        for r in regs:
            polys.append({
                "outer": [[round(float(x), 6), round(float(y), 6)]
                          for x, y in r.outer],
                "holes": [[[round(float(x), 6), round(float(y), 6)]
                           for x, y in h] for h in r.holes],
            })
        sections.append({"plane": i, "polygons": polys})
    bb = ambiguous_bbox()
    return Scene.from_dict({
        "schema": 1,
        "mode": MODE_STANDARD,
        "explicit_sections": {"sections": sections, "bases": bases},
        "planes": [{"normal": p.normal.tolist(), "offset": p.offset}
                   for p in planes],
        "bbox": {"min": bb.lo.tolist(), "max": bb.hi.tolist()},
        "grid": {"resolution": 0.055},
        "seed": 0,
    })


# ---------------------------------------------------------------------------
# sweep family: ball with a stack of parallel planes


def sweep_ball_parallel(spacing: float, trial: int, seed: int) -> Scene:
    """Ball of radius 1 cut by a stack of parallel planes at the given
    spacing; trial 0 of super-critical spacings centers the gap so the
    stack misses the ball entirely."""
    rng = np.random.default_rng([seed, trial, int(round(spacing * 1e6)), 501])
    ball = Shape([Ball(np.zeros(3), 1.0)])
    bbox = Box(np.array([-1.45, -1.45, -1.7]), np.array([1.45, 1.45, 1.7]))
    if spacing > 2.0 and trial == 0:
        offs = [-spacing / 2, spacing / 2]  # centered gap: both planes miss
    else:
        offs = []
        for _ in range(40):
            phase = float(rng.uniform(0.05, 0.95)) * spacing
            offs = _span_fill(-1.65, 1.65, spacing, -1.65 + phase)
            if offs and all(abs(abs(o) - 1.0) > 0.02 for o in offs):
                break
    planes = [_axis_plane(3, 2, o) for o in offs]
    return Scene(dim=3, shape=ball, planes=planes, bbox=bbox, seed=seed,
                 grid_resolution=0.11, reach_lower_bound=1.0)

"""Scene model and JSON (de)serialization, schema version 1.

A scene is either a ground-truth shape plus cutting planes, or explicit
per-plane sections with a declared in-plane basis (no shape).  Plane lists
can be written out directly or produced by a deterministic generator spec.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Box, GeometryError, Hyperplane, Interval, PolygonWithHoles, Tolerance
from .reconstruction import PlaneFrame, SectionSet
from .shapes import PRIMITIVE_TYPES, Shape

SCHEMA_VERSION = 1

MODE_STANDARD = "standard"
MODE_CONVEX = "convex_bodies"


class SceneError(ValueError):
    """Scene file failed validation; message carries the field path."""


def _need(d: dict, key: str, path: str):
    if key not in d:
        raise SceneError(f"{path}.{key}: missing")
    return d[key]


def _vec(v, path: str, dim: int | None = None) -> np.ndarray:
    try:
        a = np.asarray(v, dtype=float)
    except (TypeError, ValueError) as e:
        raise SceneError(f"{path}: not a number list ({e})") from e
    if a.ndim != 1 or a.shape[0] not in (2, 3) or not np.all(np.isfinite(a)):
        raise SceneError(f"{path}: expected 2 or 3 finite numbers")
    if dim is not None and a.shape[0] != dim:
        raise SceneError(f"{path}: expected dimension {dim}")
    return a


def shape_from_dict(d: dict, path: str = "shape") -> Shape:
    comps = _need(d, "components", path)
    if not isinstance(comps, list) or not comps:
        raise SceneError(f"{path}.components: need a nonempty list")
    out = []
    for i, c in enumerate(comps):
        p = f"{path}.components[{i}]"
        t = _need(c, "type", p)
        if t not in PRIMITIVE_TYPES:
            raise SceneError(f"{p}.type: unknown primitive {t!r}")
        kwargs = {k: v for k, v in c.items() if k != "type"}
        try:
            for key in ("center", "axis", "p", "q"):
                if key in kwargs:
                    kwargs[key] = np.asarray(kwargs[key], dtype=float)
            if "core" in kwargs:
                kwargs["core"] = np.asarray(kwargs["core"], dtype=float)
            out.append(PRIMITIVE_TYPES[t](**kwargs))
        except (TypeError, GeometryError) as e:
            raise SceneError(f"{p}: {e}") from e
    return Shape(out)


def shape_to_dict(shape: Shape) -> dict:
    comps = []
    rev = {v: k for k, v in PRIMITIVE_TYPES.items()}
    for c in shape.components:
        t = rev[type(c)]
        d = {"type": t}
        for k, v in vars(c).items():
            d[k] = v.tolist() if isinstance(v, np.ndarray) else v
        comps.append(d)
    return {"components": comps}


def expand_planes(spec, bbox: Box | None, path: str = "planes") -> list[Hyperplane]:
    """Either an explicit plane list or a deterministic generator spec."""
    if isinstance(spec, list):
        out = []
        for i, p in enumerate(spec):
            n = _vec(_need(p, "normal", f"{path}[{i}]"), f"{path}[{i}].normal")
            off = float(_need(p, "offset", f"{path}[{i}]"))
            try:
                out.append(Hyperplane(n, off))
            except GeometryError as e:
                raise SceneError(f"{path}[{i}]: {e}") from e
        return out
    if not isinstance(spec, dict) or "generator" not in spec:
        raise SceneError(f"{path}: expected a list or a generator spec")
    gen = spec["generator"]
    if gen == "parallel":
        axis = _vec(_need(spec, "axis", path), f"{path}.axis")
        spacing = float(_need(spec, "spacing", path))
        count = int(_need(spec, "count", path))
        start = float(spec.get("start", -(count - 1) * spacing / 2.0))
        if spacing <= 0 or count < 1:
            raise SceneError(f"{path}: parallel generator needs spacing>0, count>=1")
        return [Hyperplane(axis, start + k * spacing) for k in range(count)]
    if gen == "serial":
        axis = _vec(_need(spec, "axis", path), f"{path}.axis")
        offs = _need(spec, "offsets", path)
        return [Hyperplane(axis, float(o)) for o in offs]
    if gen == "random":
        count = int(_need(spec, "count", path))
        seed = int(_need(spec, "seed", path))
        if bbox is None:
            raise SceneError(f"{path}: random generator needs a bbox")
        rng = np.random.default_rng(seed)
        dim = bbox.dim
        out = []
        span = 0.45 * bbox.diameter()
        center = 0.5 * (bbox.lo + bbox.hi)
        for _ in range(count):
            n = rng.normal(size=dim)
            n /= np.linalg.norm(n)
            off = float(n @ center + rng.uniform(-span, span))
            out.append(Hyperplane(n, off))
        return out
    raise SceneError(f"{path}.generator: unknown generator {gen!r}")


@dataclass(eq=False)
class Scene:
    dim: int
    mode: str = MODE_STANDARD
    shape: Shape | None = None
    explicit: dict | None = None  # raw explicit-sections spec
    planes: list[Hyperplane] = field(default_factory=list)
    planes_spec: object = None  # original list/generator spec for round-trips
    bbox: Box | None = None
    tolerances: Tolerance | None = None
    grid_resolution: float | None = None
    chordal_tol: float | None = None
    reach_lower_bound: float | None = None
    seed: int = 0

    def __post_init__(self):
        if (self.shape is None) == (self.explicit is None):
            raise SceneError("scene: exactly one of shape/explicit_sections required")
        if self.mode not in (MODE_STANDARD, MODE_CONVEX):
            raise SceneError(f"scene.mode: unknown mode {self.mode!r}")

    # -- derived defaults ----------------------------------------------------

    def effective_bbox(self) -> Box:
        if self.bbox is not None:
            return self.bbox
        if self.shape is None:
            raise SceneError("scene.bbox: required in explicit-sections mode")
        b = self.shape.bbox()
        margin = 0.3 * max(b.diameter(), 1e-9)
        return Box(b.lo - margin, b.hi + margin)

    def effective_tol(self) -> Tolerance:
        return self.tolerances or Tolerance.for_diameter(self.effective_bbox().diameter())

    def reach_estimate(self) -> float | None:
        if self.reach_lower_bound is not None:
            return self.reach_lower_bound
        if self.shape is not None:
            try:
                return self.shape.reach()
            except GeometryError:
                return None
        return None

    def effective_grid(self) -> float:
        if self.grid_resolution is not None:
            return self.grid_resolution
        r = self.reach_estimate()
        if r is not None and math.isfinite(r):
            return r / 8.0
        return self.effective_bbox().diameter() / 64.0

    def effective_chordal_tol(self) -> float:
        if self.chordal_tol is not None:
            return self.chordal_tol
        r = self.reach_estimate()
        if r is not None and math.isfinite(r):
            return r / 100.0
        return self.effective_bbox().diameter() / 500.0

    def build_sections(self, planes: list[Hyperplane], tol: Tolerance) -> SectionSet:
        if self.shape is not None:
            return SectionSet.from_shape(self.shape, planes,
                                         self.effective_chordal_tol(), tol)
        return _explicit_sections(self.explicit, planes, self.dim)

    # -- (de)serialization ---------------------------------------------------

    @staticmethod
    def from_dict(d: dict) -> "Scene":
        if not isinstance(d, dict):
            raise SceneError("scene: not an object")
        if d.get("schema") != SCHEMA_VERSION:
            raise SceneError(f"scene.schema: expected {SCHEMA_VERSION}")
        mode = d.get("mode", MODE_STANDARD)
        shape = None
        explicit = None
        if "shape" in d and "explicit_sections" in d:
            raise SceneError("scene: shape and explicit_sections are exclusive")
        if "shape" in d:
            shape = shape_from_dict(d["shape"])
            dim = shape.dim
        elif "explicit_sections" in d:
            explicit = d["explicit_sections"]
            if "bbox" not in d:
                raise SceneError("scene.bbox: required in explicit-sections mode")
            dim = len(_need(d["bbox"], "min", "scene.bbox"))
        else:
            raise SceneError("scene: one of shape/explicit_sections required")

        bbox = None
        if "bbox" in d:
            lo = _vec(_need(d["bbox"], "min", "scene.bbox"), "scene.bbox.min", dim)
            hi = _vec(_need(d["bbox"], "max", "scene.bbox"), "scene.bbox.max", dim)
            try:
                bbox = Box(lo, hi)
            except GeometryError as e:
                raise SceneError(f"scene.bbox: {e}") from e

        tolerances = None
        if "tolerances" in d:
            t = d["tolerances"]
            try:
                tolerances = Tolerance(float(t.get("eps_geom", 1e-9)),
                                       float(t.get("eps_angle", 1e-9)))
            except GeometryError as e:
                raise SceneError(f"scene.tolerances: {e}") from e

        planes_spec = _need(d, "planes", "scene")
        planes = expand_planes(planes_spec, bbox)
        for p in planes:
            if p.dim != dim:
                raise SceneError("scene.planes: plane dimension mismatch")

        grid = d.get("grid", {})
        res = grid.get("resolution") if isinstance(grid, dict) else None
        scene = Scene(dim=dim, mode=mode, shape=shape, explicit=explicit,
                      planes=planes, planes_spec=planes_spec, bbox=bbox,
                      tolerances=tolerances,
                      grid_resolution=float(res) if res is not None else None,
                      chordal_tol=(float(d["chordal_tol"])
                                   if "chordal_tol" in d else None),
                      reach_lower_bound=(float(d["reach_lower_bound"])
                                         if d.get("reach_lower_bound") is not None
                                         else None),
                      seed=int(d.get("seed", 0)))
        return scene

    @staticmethod
    def from_file(path) -> "Scene":
        try:
            with open(path) as f:
                d = json.load(f)
        except json.JSONDecodeError as e:
            raise SceneError(f"{path}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}")
        except OSError as e:
            raise SceneError(f"{path}: {e}")
        return Scene.from_dict(d)

    def to_dict(self) -> dict:
        d: dict = {"schema": SCHEMA_VERSION, "mode": self.mode}
        if self.shape is not None:
            d["shape"] = shape_to_dict(self.shape)
        else:
            d["explicit_sections"] = self.explicit
        if self.planes_spec is not None:
            d["planes"] = self.planes_spec
        else:
            d["planes"] = [{"normal": p.normal.tolist(), "offset": p.offset}
                           for p in self.planes]
        if self.bbox is not None:
            d["bbox"] = {"min": self.bbox.lo.tolist(), "max": self.bbox.hi.tolist()}
        if self.tolerances is not None:
            d["tolerances"] = {"eps_geom": self.tolerances.eps_geom,
                               "eps_angle": self.tolerances.eps_angle}
        if self.grid_resolution is not None:
            d["grid"] = {"resolution": self.grid_resolution}
        if self.chordal_tol is not None:
            d["chordal_tol"] = self.chordal_tol
        if self.reach_lower_bound is not None:
            d["reach_lower_bound"] = self.reach_lower_bound
        d["seed"] = self.seed
        return d


def _explicit_sections(spec: dict, planes: list[Hyperplane], dim: int) -> SectionSet:
    path = "scene.explicit_sections"
    entries = _need(spec, "sections", path)
    bases = _need(spec, "bases", path)
    if len(bases) != len(planes):
        raise SceneError(f"{path}.bases: need one basis per plane")
    frames = []
    for i, b in enumerate(bases):
        origin = _vec(_need(b, "origin", f"{path}.bases[{i}]"),
                      f"{path}.bases[{i}].origin", dim)
        axes = np.asarray(_need(b, "axes", f"{path}.bases[{i}]"), dtype=float)
        if axes.shape != (dim, dim - 1):
            raise SceneError(f"{path}.bases[{i}].axes: expected shape "
                             f"({dim}, {dim - 1}) (columns = in-plane axes)")
        p = planes[i]
        if abs(float(p.normal @ origin) - p.offset) > 1e-7:
            raise SceneError(f"{path}.bases[{i}].origin: not on plane {i}")
        if np.max(np.abs(p.normal @ axes)) > 1e-7:
            raise SceneError(f"{path}.bases[{i}].axes: not in plane {i}")
        frames.append(PlaneFrame(origin=origin, axes=axes))

    regions: list[list] = [[] for _ in planes]
    for j, e in enumerate(entries):
        p = f"{path}.sections[{j}]"
        pid = int(_need(e, "plane", p))
        if not (0 <= pid < len(planes)):
            raise SceneError(f"{p}.plane: index out of range")
        if dim == 2:
            for lo, hi in _need(e, "intervals", p):
                regions[pid].append(Interval(float(lo), float(hi)))
        else:
            for poly in _need(e, "polygons", p):
                outer = np.asarray(_need(poly, "outer", p), dtype=float)
                holes = [np.asarray(h, dtype=float) for h in poly.get("holes", [])]
                try:
                    regions[pid].append(PolygonWithHoles(outer, holes))
                except GeometryError as ge:
                    raise SceneError(f"{p}: {ge}") from ge
    return SectionSet.explicit(planes, frames, regions)

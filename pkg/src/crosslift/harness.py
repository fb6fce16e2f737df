"""Scenario execution: sections -> arrangement -> conditions ->
reconstruction -> topology -> verdict, plus Monte-Carlo parameter sweeps.

Reports are deterministic: identical scene file + seed give byte-identical
JSON/CSV.  Wall-clock timings are therefore written as 0 unless explicitly
enabled (recorded timings would break reproducibility).
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .arrangement import BBOX_ID, Arrangement, build_arrangement
from .conditions import ConditionReport, evaluate_conditions
from .exports import (
    SWEEP_COLUMNS,
    canonical_json_bytes,
    write_obj,
    write_off,
    write_report_json,
    write_svg,
    write_sweep_csv,
)
from .geometry import Box, GeometryError, Interval, Tolerance
from .lifting import lift_polyline
from .reconstruction import (
    Mesh3D,
    Reconstruction2D,
    SectionSet,
    extract_mesh_3d,
    in_reconstruction_batch,
    reconstruct_2d,
    reconstruct_convex_mode,
    reconstruction_grid,
    convex_mode_components,
)
from .scene import MODE_CONVEX, Scene
from .topology import (
    ConnectivityPartition,
    TopologySummary,
    betti_2d,
    component_bijection,
    cubical_betti_3d,
    cubical_betti_2d,
)

VERDICT_TOPOLOGY = "TopologyMatch"
VERDICT_CONNECTIVITY = "ConnectivityOnlyMatch"
VERDICT_MISMATCH = "Mismatch"
VERDICT_NO_GUARANTEE = "ConditionsFailed-NoGuarantee"


@dataclass
class ScenarioReport:
    verdict: str | None
    conditions: ConditionReport | None
    topology_truth: TopologySummary | None
    topology_recon: TopologySummary | None
    bijection_per_cell: dict[int, bool]
    partitions: dict[int, tuple]
    convex: dict | None = None
    timings_ms: dict | None = None

    @property
    def connectivity_match(self) -> bool:
        return all(self.bijection_per_cell.values()) and self._beta0_match()

    def _beta0_match(self) -> bool:
        if self.topology_truth is None or self.topology_recon is None:
            return True
        return self.topology_truth.beta0 == self.topology_recon.beta0

    @property
    def betti_match(self) -> bool | None:
        if self.topology_truth is None or self.topology_recon is None:
            return None
        if self.topology_truth.holes_per_component or \
                self.topology_recon.holes_per_component:
            return (self.topology_truth.beta0 == self.topology_recon.beta0 and
                    tuple(self.topology_truth.holes_per_component)
                    == tuple(self.topology_recon.holes_per_component))
        return self.topology_truth.betti == self.topology_recon.betti

    def to_dict(self) -> dict:
        def topo(t):
            if t is None:
                return None
            return {"beta0": t.beta0, "beta1": t.beta1, "beta2": t.beta2,
                    "holes_per_component": list(t.holes_per_component),
                    "euler": t.euler}

        return {
            "verdict": self.verdict,
            "conditions": None if self.conditions is None else self.conditions.to_dict(),
            "topology": {"truth": topo(self.topology_truth),
                         "reconstruction": topo(self.topology_recon)},
            "connectivity": {
                "per_cell": {str(k): v for k, v in self.bijection_per_cell.items()},
                "match": self.connectivity_match,
            },
            "partitions": {str(k): {"truth": _blocks(v[0]), "reconstruction": _blocks(v[1])}
                           for k, v in self.partitions.items()},
            "convex": self.convex,
            "timings_ms": self.timings_ms,
        }


def _blocks(p: ConnectivityPartition):
    return [[list(map(int, s)) for s in b] for b in p.blocks]


def run_scenario(scene: Scene, out_dir: str | None = None,
                 formats: tuple = ("json",), timings: bool = False,
                 grid_resolution: float | None = None) -> ScenarioReport:
    t_start = time.perf_counter()
    tol = scene.effective_tol()
    bbox = scene.effective_bbox()
    planes = scene.planes
    sections = scene.build_sections(planes, tol)
    arr = build_arrangement(planes, bbox, tol)
    res = grid_resolution or scene.effective_grid()
    stamp = {"setup": time.perf_counter() - t_start}

    conditions = None
    if scene.shape is not None:
        conditions = evaluate_conditions(
            scene.shape, arr, sections,
            reach_lower_bound=scene.reach_lower_bound, tol=tol)
    stamp["conditions"] = time.perf_counter() - t_start

    recon2d: Reconstruction2D | None = None
    mesh: Mesh3D | None = None
    grid = None
    if scene.dim == 2:
        recon2d = reconstruct_2d(arr, sections)
        topo_r = betti_2d(recon2d)
        grid = reconstruction_grid(arr, sections, res, tol)
    else:
        grid = reconstruction_grid(arr, sections, res, tol)
        topo_r = cubical_betti_3d(grid)

    topo_t = None
    bijection = {}
    partitions = {}
    if scene.shape is not None:
        b = scene.shape.betti()
        if scene.dim == 2:
            holes = tuple(sorted(c.betti()[1] for c in scene.shape.components))
            topo_t = TopologySummary(beta0=b[0], beta1=b[1], beta2=0,
                                     holes_per_component=holes,
                                     euler=b[0] - b[1])
        else:
            topo_t = TopologySummary(beta0=b[0], beta1=b[1], beta2=b[2],
                                     euler=b[0] - b[1] + b[2])
        truth = scene.shape.contains_batch
        recon = lambda pts: in_reconstruction_batch(pts, arr, sections, tol)
        for cell in arr.cells:
            if all(pid == BBOX_ID for pid in cell.plane_ids):
                continue
            ok, p_t, p_r = component_bijection(cell, arr, sections, truth,
                                               recon, res, tol)
            bijection[cell.id] = bool(ok)
            if p_t.blocks or p_r.blocks:
                partitions[cell.id] = (p_t, p_r)
    stamp["topology"] = time.perf_counter() - t_start

    convex = None
    if scene.mode == MODE_CONVEX:
        hulls = reconstruct_convex_mode(arr, sections, res, tol)
        convex = {"hulls": len(hulls),
                  "components": convex_mode_components(hulls)}

    verdict = None
    if scene.shape is not None:
        rep = ScenarioReport(None, conditions, topo_t, topo_r, bijection,
                             partitions)
        if rep.connectivity_match and rep.betti_match:
            verdict = VERDICT_TOPOLOGY
        elif rep.connectivity_match:
            verdict = VERDICT_CONNECTIVITY
        elif conditions is not None and not conditions.all_c1:
            verdict = VERDICT_NO_GUARANTEE
        else:
            verdict = VERDICT_MISMATCH

    report = ScenarioReport(verdict=verdict, conditions=conditions,
                            topology_truth=topo_t, topology_recon=topo_r,
                            bijection_per_cell=bijection, partitions=partitions,
                            convex=convex)
    if timings:
        report.timings_ms = {k: round(1000 * v, 3) for k, v in stamp.items()}

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        if "json" in formats:
            write_report_json(os.path.join(out_dir, "report.json"),
                              report.to_dict())
        if scene.dim == 2 and ("svg" in formats):
            _render_svg(os.path.join(out_dir, "scene.svg"), arr, sections,
                        recon2d, tol)
        if scene.dim == 3 and ({"off", "obj"} & set(formats)):
            mesh = extract_mesh_3d(arr, sections, res, tol, grid=grid)
            if "off" in formats:
                write_off(os.path.join(out_dir, "reconstruction.off"),
                          mesh.vertices, mesh.triangles)
            if "obj" in formats:
                write_obj(os.path.join(out_dir, "reconstruction.obj"),
                          mesh.vertices, mesh.triangles)
    return report


def _render_svg(path, arr: Arrangement, sections: SectionSet,
                recon2d: Reconstruction2D, tol: Tolerance) -> None:
    cell_edges = []
    skeleton = []
    for cell in arr.cells:
        for i, face in enumerate(cell.faces):
            reg = face.region
            if not isinstance(reg, Interval):
                continue
            origin, u = face.plane.basis()
            u = u[:, 0]
            cell_edges.append((origin + reg.lo * u, origin + reg.hi * u))
            if face.plane_id != BBOX_ID:
                try:
                    pl = lift_polyline(reg, cell, i, tol)
                    skeleton.append(pl.points)
                except GeometryError:
                    pass
    section_segments = []
    for pid in range(len(sections.planes)):
        frame = sections.frames[pid]
        u = frame.axes[:, 0]
        for reg in sections.regions[pid]:
            section_segments.append((frame.origin + reg.lo * u,
                                     frame.origin + reg.hi * u))
    outers, holes = ([], [])
    if recon2d is not None:
        o, h = recon2d.float_loops()
        outers = o
        holes = [[] for _ in o]
        # group holes under their outers by containment of the first vertex
        from .geometry import PolygonWithHoles as PWH
        for hl in h:
            for k, ol in enumerate(outers):
                if len(ol) >= 3 and PWH(ol).contains(hl[0], tol) >= 0:
                    holes[k].append(hl)
                    break
    write_svg(path, arr.bbox, cell_edges, skeleton, section_segments,
              outers, holes)


# ---------------------------------------------------------------------------
# sweeps


def _sweep_trial(args):
    family, value, trial, seed, timings = args
    from . import scenegen

    t0 = time.perf_counter()
    if family == "ball_parallel":
        scene = scenegen.sweep_ball_parallel(value, trial, seed)
        reach = 1.0
    else:
        raise GeometryError(f"unknown sweep family {family!r}")
    rep = run_scenario(scene)
    cond = rep.conditions
    h_over = None
    alpha = 0.0
    if cond is not None:
        ratios = [c.height / c.reach for c in cond.cells
                  if not c.vacuous and math.isfinite(c.height)]
        h_over = max(ratios) if ratios else None
        alpha = max((c.alpha for c in cond.cells), default=0.0)
    row = {
        "param_value": value,
        "trial": trial,
        "seed": seed,
        "h_over_reach": h_over,
        "alpha_C": alpha,
        "c1": cond.all_c1 if cond is not None else None,
        "c2": cond.all_c2 if cond is not None else None,
        "beta_match": rep.betti_match,
        "connectivity_match": rep.connectivity_match,
        "runtime_ms": round(1000 * (time.perf_counter() - t0), 3) if timings else 0,
    }
    _ = reach
    return row


def sweep(config: dict, jobs: int = 1, timings: bool = False) -> list[dict]:
    """Deterministic parameter sweep; rows ordered by (point, trial)."""
    family = config.get("family")
    if family not in ("ball_parallel",):
        raise GeometryError(f"unknown sweep family {family!r}")
    start = float(config.get("start", 0.5))
    stop = float(config.get("stop", 3.0))
    steps = int(config.get("steps", 6))
    trials = int(config.get("trials", 1))
    seed = int(config.get("seed", 0))
    values = [start + (stop - start) * k / max(steps - 1, 1) for k in range(steps)]
    tasks = [(family, v, t, seed, timings) for v in values for t in range(trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_sweep_trial, tasks))
    else:
        rows = [_sweep_trial(t) for t in tasks]
    return rows


def sweep_to_csv(config: dict, path, jobs: int = 1, timings: bool = False):
    rows = sweep(config, jobs=jobs, timings=timings)
    write_sweep_csv(path, rows)
    return rows

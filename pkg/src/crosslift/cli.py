"""Command-line interface.

Verbs: reconstruct, check, topology, sweep, render.  Exit codes: 0 for a
matching/passing run, 1 for a guarantee-relevant mismatch or failed check,
2 for usage, IO, or validation errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .exports import write_report_json, write_sweep_csv
from .geometry import GeneralPositionViolation, GeometryError, Tolerance
from .harness import VERDICT_TOPOLOGY, run_scenario, sweep
from .scene import Scene, SceneError

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="override scene seed")
    p.add_argument("--grid", type=float, default=None,
                   help="override grid resolution")
    p.add_argument("--tol", type=float, default=None,
                   help="override geometric tolerance (absolute length)")
    p.add_argument("--out-dir", default=None, help="directory for artifacts")
    p.add_argument("--format", dest="formats", action="append", default=None,
                   choices=["svg", "off", "obj", "json", "csv"],
                   help="artifact formats (repeatable)")
    p.add_argument("--timings", action="store_true",
                   help="record wall-clock timings (breaks byte determinism)")


def _load_scene(path, args) -> Scene:
    scene = Scene.from_file(path)
    if args.seed is not None:
        scene.seed = args.seed
    if args.grid is not None:
        scene.grid_resolution = args.grid
    if args.tol is not None:
        scene.tolerances = Tolerance(eps_geom=args.tol)
    return scene


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="crosslift",
        description="Reconstruct shapes from planar cross-sections and "
                    "verify the sampling conditions and topology.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_rec = sub.add_parser("reconstruct", help="full pipeline + artifacts")
    p_rec.add_argument("scene")
    _add_common(p_rec)

    p_chk = sub.add_parser("check", help="sampling-condition report only")
    p_chk.add_argument("scene")
    p_chk.add_argument("--require-c2", action="store_true",
                       help="gate on the transversality condition")
    _add_common(p_chk)

    p_top = sub.add_parser("topology", help="Betti numbers of truth and "
                                            "reconstruction")
    p_top.add_argument("scene")
    _add_common(p_top)

    p_swp = sub.add_parser("sweep", help="parameter sweep to CSV")
    p_swp.add_argument("config")
    p_swp.add_argument("--out", default="sweep.csv")
    p_swp.add_argument("--jobs", type=int, default=1)
    p_swp.add_argument("--timings", action="store_true")

    p_ren = sub.add_parser("render", help="render artifacts without verdicts")
    p_ren.add_argument("scene")
    _add_common(p_ren)

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except (SceneError, GeometryError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def _dispatch(args) -> int:
    if args.verb == "sweep":
        with open(args.config) as f:
            config = json.load(f)
        rows = sweep(config, jobs=args.jobs, timings=args.timings)
        write_sweep_csv(args.out, rows)
        print(f"wrote {len(rows)} rows to {args.out}")
        return EXIT_OK

    scene = _load_scene(args.scene, args)

    if args.verb == "check":
        report = run_scenario(scene, out_dir=args.out_dir,
                              formats=tuple(args.formats or ("json",)),
                              timings=args.timings)
        cond = report.conditions
        if cond is None:
            print("conditions: not evaluable (no ground-truth shape)")
            return EXIT_OK
        gate = cond.all_c2 if args.require_c2 else cond.all_c1
        print(f"density condition: {'pass' if cond.all_c1 else 'fail'}")
        print(f"transversality condition: {'pass' if cond.all_c2 else 'fail'}")
        print(f"separation (sampled): {cond.separation_pass}")
        print(f"boundary components cut: {cond.boundary_cut_pass}")
        return EXIT_OK if gate else EXIT_MISMATCH

    formats = tuple(args.formats or
                    (("svg", "json") if scene.dim == 2 else ("off", "json")))
    report = run_scenario(scene, out_dir=args.out_dir, formats=formats,
                          timings=args.timings)

    if args.verb == "render":
        return EXIT_OK

    t, r = report.topology_truth, report.topology_recon
    if t is not None:
        print(f"truth betti: {t.betti} holes={list(t.holes_per_component)}")
    print(f"reconstruction betti: {r.betti} holes={list(r.holes_per_component)}")
    if report.verdict is not None:
        print(f"verdict: {report.verdict}")
        return EXIT_OK if report.verdict == VERDICT_TOPOLOGY else EXIT_MISMATCH
    print("verdict: not evaluable (no ground-truth shape)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

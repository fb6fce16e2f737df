import json
import os
import subprocess
import sys

import numpy as np
import pytest

from crosslift.exports import (
    canonical_json_bytes,
    read_off,
    read_svg,
    read_sweep_csv,
    write_sweep_csv,
)
from crosslift.harness import run_scenario, sweep
from crosslift.scene import Scene, SceneError
from crosslift.scenegen import (
    make_2d_scene,
    make_ambiguous_sections_scene,
    sweep_ball_parallel,
)

SCENE_3D = {
    "schema": 1,
    "mode": "standard",
    "shape": {"components": [{"type": "ball", "center": [0, 0, 0], "radius": 1.0}]},
    "planes": [{"normal": [0, 0, 1], "offset": -0.75},
               {"normal": [0, 0, 1], "offset": 0.75}],
    "bbox": {"min": [-1.4, -1.4, -1.4], "max": [1.4, 1.4, 1.4]},
    "grid": {"resolution": 0.1},
    "seed": 0,
}


def test_scene_roundtrip():
    scene = Scene.from_dict(SCENE_3D)
    again = Scene.from_dict(scene.to_dict())
    assert again.dim == 3
    assert len(again.planes) == 2
    assert again.effective_grid() == pytest.approx(0.1)


def test_scene_validation_errors():
    with pytest.raises(SceneError, match="schema"):
        Scene.from_dict({"schema": 99})
    bad = dict(SCENE_3D)
    bad.pop("planes")
    with pytest.raises(SceneError, match="planes"):
        Scene.from_dict(bad)
    bad = json.loads(json.dumps(SCENE_3D))
    bad["planes"][0]["normal"] = [0, 0]
    with pytest.raises(SceneError, match="planes"):
        Scene.from_dict(bad)
    bad = json.loads(json.dumps(SCENE_3D))
    bad["shape"]["components"][0]["type"] = "dodecahedron"
    with pytest.raises(SceneError, match="unknown primitive"):
        Scene.from_dict(bad)


def test_plane_generators():
    d = dict(SCENE_3D)
    d["planes"] = {"generator": "parallel", "axis": [0, 0, 1], "spacing": 0.5,
                   "count": 4, "start": -0.75}
    scene = Scene.from_dict(d)
    assert [p.offset for p in scene.planes] == [-0.75, -0.25, 0.25, 0.75]
    d["planes"] = {"generator": "serial", "axis": [0, 0, 1], "offsets": [0.1, 0.2]}
    assert len(Scene.from_dict(d).planes) == 2
    d["planes"] = {"generator": "random", "count": 5, "seed": 3}
    a = Scene.from_dict(d).planes
    b = Scene.from_dict(d).planes
    assert all(np.allclose(p.normal, q.normal) and p.offset == q.offset
               for p, q in zip(a, b))


def test_run_scenario_ball_two_planes():
    scene = Scene.from_dict(SCENE_3D)
    rep = run_scenario(scene)
    assert rep.verdict == "TopologyMatch"
    assert rep.topology_recon.betti == (1, 0, 0)
    assert rep.conditions is not None
    assert rep.conditions.separation_pass is True


def test_report_determinism():
    scene = Scene.from_dict(SCENE_3D)
    a = canonical_json_bytes(run_scenario(scene).to_dict())
    b = canonical_json_bytes(run_scenario(Scene.from_dict(SCENE_3D)).to_dict())
    assert a == b


def test_explicit_sections_scene():
    scene = make_ambiguous_sections_scene()
    assert scene.shape is None
    rep = run_scenario(scene)
    assert rep.verdict is None  # no ground truth: not evaluable
    assert rep.conditions is None
    assert rep.topology_recon.betti == (1, 1, 0)


def test_sweep_rows_and_determinism(tmp_path):
    config = {"family": "ball_parallel", "start": 1.0, "stop": 1.5,
              "steps": 2, "trials": 2, "seed": 1}
    rows = sweep(config)
    assert len(rows) == 4
    assert all(r["connectivity_match"] for r in rows)  # spacing < 2*reach
    assert all(r["runtime_ms"] == 0 for r in rows)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_sweep_csv(p1, rows)
    write_sweep_csv(p2, sweep(config))
    assert p1.read_bytes() == p2.read_bytes()
    back = read_sweep_csv(p1)
    assert len(back) == 4 and back[0]["trial"] == 0


def test_sweep_empty_trials():
    rows = sweep({"family": "ball_parallel", "start": 1.0, "stop": 2.0,
                  "steps": 3, "trials": 0, "seed": 0})
    assert rows == []


def test_svg_round_trip(tmp_path):
    scene = make_2d_scene(0)
    out = tmp_path / "render"
    run_scenario(scene, out_dir=str(out), formats=("svg", "json"))
    layers = read_svg(out / "scene.svg")
    assert {"cells", "sections", "skeleton", "reconstruction"} <= set(layers)
    assert layers["sections"]
    assert layers["reconstruction"]
    for loop in layers["reconstruction"]:
        assert loop.shape[1] == 2


def test_off_export(tmp_path):
    scene = Scene.from_dict(SCENE_3D)
    out = tmp_path / "mesh"
    run_scenario(scene, out_dir=str(out), formats=("off", "json"))
    verts, faces = read_off(out / "reconstruction.off")
    assert len(verts) > 0 and len(faces) > 0
    assert (out / "report.json").exists()


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "crosslift.cli", *args],
                          capture_output=True, text=True)


def test_cli_reconstruct_and_exit_codes(tmp_path):
    scene_path = tmp_path / "scene.json"
    scene_path.write_text(json.dumps(SCENE_3D))
    r = _cli("reconstruct", str(scene_path), "--out-dir", str(tmp_path / "out"))
    assert r.returncode == 0, r.stderr
    assert "TopologyMatch" in r.stdout

    # a full cage passes the density gate (two lone planes leave unbounded
    # cells that meet the ball, which correctly fail)
    from crosslift.scenegen import make_3d_c1_scene

    caged = tmp_path / "caged.json"
    caged.write_text(json.dumps(make_3d_c1_scene(1).to_dict()))
    r = _cli("check", str(caged))
    assert r.returncode == 0, r.stdout + r.stderr
    assert "density condition: pass" in r.stdout

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    r = _cli("reconstruct", str(bad))
    assert r.returncode == 2
    assert "error" in r.stderr

    missing = tmp_path / "nope.json"
    r = _cli("check", str(missing))
    assert r.returncode == 2


def test_cli_check_failing_gate(tmp_path):
    d = json.loads(json.dumps(SCENE_3D))
    d["planes"] = [{"normal": [0, 0, 1], "offset": -1.25},
                   {"normal": [0, 0, 1], "offset": 1.25}]
    p = tmp_path / "wide.json"
    p.write_text(json.dumps(d))
    r = _cli("check", str(p))
    assert r.returncode == 1
    assert "density condition: fail" in r.stdout


def test_cli_sweep(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"family": "ball_parallel", "start": 1.0,
                               "stop": 1.2, "steps": 2, "trials": 1, "seed": 0}))
    out = tmp_path / "s.csv"
    r = _cli("sweep", str(cfg), "--out", str(out))
    assert r.returncode == 0
    rows = read_sweep_csv(out)
    assert len(rows) == 2

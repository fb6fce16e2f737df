"""Artifact writers and the matching readers.

Every format written here can be re-read by this module (round-trip), which
the test suite checks.  SVG renders use the color convention: sections blue,
reconstruction green, skeleton red.
"""

from __future__ import annotations

import csv
import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass

import numpy as np


# ---------------------------------------------------------------------------
# canonical JSON (deterministic byte output)


def canonical_json_bytes(d) -> bytes:
    return (json.dumps(d, sort_keys=True, indent=2, allow_nan=False) + "\n").encode()


def write_report_json(path, d) -> None:
    with open(path, "wb") as f:
        f.write(canonical_json_bytes(d))


# ---------------------------------------------------------------------------
# CSV


SWEEP_COLUMNS = ["param_value", "trial", "seed", "h_over_reach", "alpha_C",
                 "c1", "c2", "beta_match", "connectivity_match", "runtime_ms"]


def write_sweep_csv(path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=SWEEP_COLUMNS)
        w.writeheader()
        for r in rows:
            w.writerow({k: _csv_cell(r.get(k)) for k in SWEEP_COLUMNS})


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return v


def read_sweep_csv(path) -> list[dict]:
    out = []
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            parsed = {}
            for k, v in row.items():
                if v == "":
                    parsed[k] = None
                elif v in ("true", "false"):
                    parsed[k] = v == "true"
                else:
                    try:
                        parsed[k] = float(v) if "." in v or "e" in v else int(v)
                    except ValueError:
                        parsed[k] = v
            out.append(parsed)
    return out


# ---------------------------------------------------------------------------
# OFF / OBJ meshes


def write_off(path, vertices: np.ndarray, faces: np.ndarray) -> None:
    with open(path, "w") as f:
        f.write("OFF\n")
        f.write(f"{len(vertices)} {len(faces)} 0\n")
        for v in vertices:
            f.write(f"{float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
        for face in faces:
            f.write(str(len(face)) + " " + " ".join(str(int(i)) for i in face) + "\n")


def read_off(path):
    with open(path) as f:
        tokens = f.read().split()
    if tokens[0] != "OFF":
        raise ValueError("not an OFF file")
    nv, nf = int(tokens[1]), int(tokens[2])
    pos = 4
    verts = np.array([[float(tokens[pos + 3 * i + k]) for k in range(3)]
                      for i in range(nv)])
    pos += 3 * nv
    faces = []
    for _ in range(nf):
        n = int(tokens[pos])
        faces.append([int(tokens[pos + 1 + k]) for k in range(n)])
        pos += n + 1
    return verts, np.array(faces, dtype=int)


def write_obj(path, vertices: np.ndarray, faces: np.ndarray) -> None:
    with open(path, "w") as f:
        for v in vertices:
            f.write(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
        for face in faces:
            f.write("f " + " ".join(str(int(i) + 1) for i in face) + "\n")


def read_obj(path):
    verts, faces = [], []
    with open(path) as f:
        for line in f:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(tok.split("/")[0]) - 1 for tok in parts[1:]])
    return np.array(verts), np.array(faces, dtype=int)


# ---------------------------------------------------------------------------
# SVG (2D scenes)


SVG_NS = "http://www.w3.org/2000/svg"

COLOR_SECTIONS = "#1f5fd0"  # blue
COLOR_RECON = "#2ca02c"  # green
COLOR_SKELETON = "#d62728"  # red
COLOR_CELLS = "#bbbbbb"


def _fmt_pts(pts) -> str:
    return " ".join(f"{float(x)!r},{float(y)!r}" for x, y in pts)


def write_svg(path, bbox, cell_edges, skeleton_polylines, section_segments,
              recon_outers, recon_holes) -> None:
    """2D scene rendering.

    cell_edges: list of (p, q); skeleton_polylines: list of point arrays;
    section_segments: list of (p, q); recon_outers/holes: loop arrays.
    """
    lo, hi = bbox.lo, bbox.hi
    pad = 0.05 * float(np.max(hi - lo))
    w = float(hi[0] - lo[0]) + 2 * pad
    h = float(hi[1] - lo[1]) + 2 * pad
    root = ET.Element("svg", xmlns=SVG_NS,
                      viewBox=f"{lo[0] - pad!r} {-(hi[1] + pad)!r} {w!r} {h!r}")
    scale = ET.SubElement(root, "g", transform="scale(1,-1)")

    g_cells = ET.SubElement(scale, "g", id="cells", stroke=COLOR_CELLS,
                            fill="none")
    g_cells.set("stroke-width", repr(0.004 * max(w, h)))
    for p, q in cell_edges:
        ET.SubElement(g_cells, "polyline", points=_fmt_pts([p, q]))

    g_recon = ET.SubElement(scale, "g", id="reconstruction", fill=COLOR_RECON,
                            stroke="none")
    g_recon.set("fill-rule", "evenodd")
    g_recon.set("fill-opacity", "0.55")
    for outer, holes in zip(recon_outers, recon_holes):
        d = _path_d(outer)
        for hole in holes:
            d += " " + _path_d(hole)
        ET.SubElement(g_recon, "path", d=d)

    g_skel = ET.SubElement(scale, "g", id="skeleton", stroke=COLOR_SKELETON,
                           fill="none")
    g_skel.set("stroke-width", repr(0.004 * max(w, h)))
    for line in skeleton_polylines:
        ET.SubElement(g_skel, "polyline", points=_fmt_pts(line))

    g_secs = ET.SubElement(scale, "g", id="sections", stroke=COLOR_SECTIONS,
                           fill="none")
    g_secs.set("stroke-width", repr(0.012 * max(w, h)))
    for p, q in section_segments:
        ET.SubElement(g_secs, "polyline", points=_fmt_pts([p, q]))

    ET.ElementTree(root).write(path, xml_declaration=True, encoding="unicode")


def _path_d(loop) -> str:
    pts = list(loop)
    d = f"M {float(pts[0][0])!r} {float(pts[0][1])!r}"
    for p in pts[1:]:
        d += f" L {float(p[0])!r} {float(p[1])!r}"
    return d + " Z"


def read_svg(path) -> dict:
    """Parse back the layers written by write_svg: {layer: list of arrays}."""
    tree = ET.parse(path)
    root = tree.getroot()
    out: dict = {}
    for g in root.iter(f"{{{SVG_NS}}}g"):
        gid = g.get("id")
        if gid is None:
            continue
        items = []
        for poly in g.findall(f"{{{SVG_NS}}}polyline"):
            pts = [[float(v) for v in pair.split(",")]
                   for pair in poly.get("points").split()]
            items.append(np.array(pts))
        for pathel in g.findall(f"{{{SVG_NS}}}path"):
            for loop_d in pathel.get("d").split("Z"):
                loop_d = loop_d.strip()
                if not loop_d:
                    continue
                nums = loop_d.replace("M", " ").replace("L", " ").split()
                vals = [float(v) for v in nums]
                items.append(np.array(vals).reshape(-1, 2))
        out[gid] = items
    return out

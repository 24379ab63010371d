"""Seeded generators for random valid models and source records.

Used wherever a dataset is unavailable: codec and masking tests run on
structurally valid random models, while geometry, corpus, and prediction
workflows use the renderable variant whose loops are real shapes and whose
extrusions have non-zero thickness.

Run as a module to write a JSONL file of source records:

    python -m cadtext.synth --count 200 --seed 7 --out records.jsonl
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .model import (
    CadModel,
    Curve,
    CurveKind,
    Extrusion,
    ExtrudeOp,
    Face,
    GridCoord,
    Loop,
    MAX_COORD,
    Sketch,
    SketchExtrusion,
)

IDENTITY_ROTATION_PARAMS = (63, 31, 31, 31, 63, 31, 31, 31, 63)


def _rand_coord(rng) -> GridCoord:
    return GridCoord(int(rng.integers(0, MAX_COORD + 1)), int(rng.integers(0, MAX_COORD + 1)))


def _rand_curve(rng, kind: CurveKind) -> Curve:
    from .model import POINTS_PER_KIND

    return Curve(kind, tuple(_rand_coord(rng) for _ in range(POINTS_PER_KIND[kind])))


def random_model(rng, max_bodies: int = 3, max_faces: int = 3, max_loops: int = 3,
                 max_curves: int = 4) -> CadModel:
    """Structurally valid model with arbitrary coordinates.

    Suitable for codec and masking round trips; loops are not guaranteed
    to bound real areas.
    """
    bodies = []
    for _ in range(int(rng.integers(1, max_bodies + 1))):
        faces = []
        for _ in range(int(rng.integers(1, max_faces + 1))):
            loops = []
            for _ in range(int(rng.integers(1, max_loops + 1))):
                if rng.random() < 0.3:
                    loops.append(Loop((_rand_curve(rng, CurveKind.CIRCLE),)))
                else:
                    n = int(rng.integers(2, max_curves + 1))
                    kinds = [
                        CurveKind.ARC if rng.random() < 0.35 else CurveKind.LINE
                        for _ in range(n)
                    ]
                    loops.append(Loop(tuple(_rand_curve(rng, k) for k in kinds)))
            faces.append(Face(tuple(loops)))
        op = ExtrudeOp(["add", "cut", "intersect"][int(rng.integers(0, 3))])
        params = tuple(int(v) for v in rng.integers(0, MAX_COORD + 1, size=17))
        bodies.append(SketchExtrusion(Sketch(tuple(faces)), Extrusion(op, params)))
    return CadModel(tuple(bodies))


def _rect_loop(x0: int, y0: int, x1: int, y1: int, arc_top=False) -> Loop:
    """Axis-aligned rectangle as four curves, counterclockwise from (x0, y0)."""
    pts = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    curves = []
    for i, (x, y) in enumerate(pts):
        if arc_top and i == 2:
            # replace the top edge with an arc bulging upward
            midx = (x0 + x1) // 2
            midy = min(MAX_COORD, y1 + max(1, (x1 - x0) // 4))
            curves.append(Curve(CurveKind.ARC, (GridCoord(x, y), GridCoord(midx, midy))))
        else:
            curves.append(Curve(CurveKind.LINE, (GridCoord(x, y),)))
    return Loop(tuple(curves))


def circle_loop(cx: int, cy: int, r: int) -> Loop:
    """Circle as four compass points: bottom, right, top, left."""
    pts = (
        GridCoord(cx, cy - r),
        GridCoord(cx + r, cy),
        GridCoord(cx, cy + r),
        GridCoord(cx - r, cy),
    )
    return Loop((Curve(CurveKind.CIRCLE, pts),))


def _renderable_face(rng, x0, y0, x1, y1) -> Face:
    """A rectangle, circle, or arc-topped rectangle in the given box,
    possibly with one contained hole."""
    w, h = x1 - x0, y1 - y0
    style = rng.random()
    if style < 0.3:
        r = max(2, min(w, h) // 2 - 1)
        cx, cy = (x0 + x1) // 2, (y0 + y1) // 2
        outer = circle_loop(cx, cy, r)
        hole_ok = r >= 5
        hole = circle_loop(cx, cy, max(1, r // 2)) if hole_ok and rng.random() < 0.5 else None
    else:
        outer = _rect_loop(x0, y0, x1, y1 - (1 if style > 0.7 else 0), arc_top=style > 0.7)
        hole = None
        if w >= 8 and h >= 8 and rng.random() < 0.5:
            if rng.random() < 0.5:
                hole = circle_loop((x0 + x1) // 2, (y0 + y1) // 2, min(w, h) // 4)
            else:
                mx, my = w // 4, h // 4
                hole = _rect_loop(x0 + mx, y0 + my, x1 - mx, y1 - my)
    loops = (outer,) if hole is None else (outer, hole)
    return Face(loops)


def random_renderable_model(
    rng,
    max_bodies: int = 2,
    max_faces: int = 2,
    ops: tuple[str, ...] = ("add",),
) -> CadModel:
    """Model whose geometry evaluates: valid faces plus non-zero thickness."""
    bodies = []
    n_bodies = int(rng.integers(1, max_bodies + 1))
    for b in range(n_bodies):
        n_faces = int(rng.integers(1, max_faces + 1))
        faces = []
        # disjoint horizontal bands keep sibling faces from degenerating
        band = 60 // n_faces
        for f in range(n_faces):
            y0 = 2 + f * band
            y1 = y0 + band - 2
            x0 = int(rng.integers(2, 20))
            x1 = int(rng.integers(44, 62))
            faces.append(_renderable_face(rng, x0, y0, x1, min(y1, MAX_COORD - 1)))
        op = ExtrudeOp("add" if b == 0 else str(rng.choice(list(ops))))
        v_top = int(rng.integers(36, 56))
        v_bot = int(rng.integers(8, 28))
        t = [int(rng.integers(24, 40)) for _ in range(3)]
        s = int(rng.integers(24, 48))
        o = [31, 31]
        params = (v_top, v_bot, *t, *IDENTITY_ROTATION_PARAMS, s, *o)
        bodies.append(SketchExtrusion(Sketch(tuple(faces)), Extrusion(op, params)))
    return CadModel(tuple(bodies))


def random_source_record(
    rng, record_id: str, max_bodies: int = 2, max_faces: int = 2
) -> dict:
    """DeepCAD-style source record with real-valued geometry.

    Schema: {"id", "bodies": [{"operation", "faces": [{"loops": [[curve,
    ...], ...]}], "extrusion": {...}}]} where a curve is one of
    {"kind": "line", "start": [x, y]}, {"kind": "arc", "start", "mid"} or
    {"kind": "circle", "center", "radius"}; the extrusion carries real
    top/bottom displacements, translation, rotation rows, scale, and
    scale_center.
    """
    scale = float(rng.uniform(0.5, 40.0))
    off = rng.uniform(-20, 20, size=2)
    model = random_renderable_model(rng, max_bodies=max_bodies, max_faces=max_faces)

    def to_real(pt: GridCoord):
        return [float(pt.x) * scale / 64 + off[0], float(pt.y) * scale / 64 + off[1]]

    bodies = []
    for body in model.bodies:
        faces = []
        for face in body.sketch.faces:
            loops = []
            for loop in face.loops:
                curves = []
                for curve in loop.curves:
                    if curve.kind is CurveKind.CIRCLE:
                        pts = np.array([to_real(p) for p in curve.points])
                        center = pts.mean(axis=0)
                        radius = float(np.linalg.norm(pts - center, axis=1).mean())
                        curves.append(
                            {"kind": "circle", "center": center.tolist(), "radius": radius}
                        )
                    elif curve.kind is CurveKind.ARC:
                        curves.append(
                            {
                                "kind": "arc",
                                "start": to_real(curve.points[0]),
                                "mid": to_real(curve.points[1]),
                            }
                        )
                    else:
                        curves.append({"kind": "line", "start": to_real(curve.points[0])})
                loops.append(curves)
            faces.append({"loops": loops})
        dq = body.extrusion.dequantized()
        bodies.append(
            {
                "operation": body.extrusion.op.value,
                "faces": faces,
                "extrusion": {
                    "top": dq["V"][0],
                    "bottom": dq["V"][1],
                    "translation": list(dq["T"]),
                    "rotation": [list(dq["R"][0:3]), list(dq["R"][3:6]), list(dq["R"][6:9])],
                    "scale": dq["S"][0],
                    "scale_center": list(dq["O"]),
                },
            }
        )
    return {"id": record_id, "bodies": bodies}


def main(argv=None):
    ap = argparse.ArgumentParser(description="emit random source records as JSONL")
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="-")
    ap.add_argument("--max-bodies", type=int, default=2)
    ap.add_argument("--max-faces", type=int, default=2)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    out = sys.stdout if args.out == "-" else open(args.out, "w")
    try:
        for i in range(args.count):
            rec = random_source_record(
                rng, f"rec-{i:06d}", max_bodies=args.max_bodies, max_faces=args.max_faces
            )
            out.write(json.dumps(rec) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Dataset pipeline: source ingestion, dedup, splitting, corpus emission.

Source records follow the DeepCAD-style JSON schema documented in the
README: per body an operation, faces of loops of real-coordinate curves
(lines by start point, arcs by start and mid, circles by center and
radius), and real extrusion parameters. Ingestion normalizes each
sketch's coordinates to [-1, 1]^2 (uniform scale, centered), quantizes
everything onto the 64 grid, and rejects records that do not survive the
geometry kernel.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .codec import serialize
from .errors import CadError, GeometryError, IngestError
from .masking import (
    HIERARCHY_LEVELS,
    Level,
    apply_mask,
    build_prompt,
    enumerate_selections,
    genericize,
    random_span_mask,
)
from .model import (
    CadModel,
    Curve,
    CurveKind,
    Extrusion,
    ExtrudeOp,
    Face,
    GridCoord,
    Loop,
    PARAM_RANGES,
    Sketch,
    SketchExtrusion,
    canonical_hash,
    quantize,
    validate_model,
)
from .geometry.voxel import RenderConfig, build_solids

CORPUS_MODES = (
    "unified",
    "random-masking",
    "generic-token",
    "unconditional-augmented",
)


def _circle_compass_points(center, radius):
    cx, cy = center
    return [
        (cx, cy - radius),
        (cx + radius, cy),
        (cx, cy + radius),
        (cx - radius, cy),
    ]


def _collect_sketch_points(faces: list) -> list[tuple[float, float]]:
    pts = []
    for face in faces:
        for loop in face.get("loops", []):
            for curve in loop:
                kind = curve.get("kind")
                if kind == "line":
                    pts.append(tuple(curve["start"]))
                elif kind == "arc":
                    pts.append(tuple(curve["start"]))
                    pts.append(tuple(curve["mid"]))
                elif kind == "circle":
                    pts.extend(_circle_compass_points(curve["center"], curve["radius"]))
                else:
                    raise IngestError("unsupported-curve", f"kind={kind!r}")
    return pts


def _quantize_extrusion(ext: dict, op: str) -> Extrusion:
    try:
        operation = ExtrudeOp(op)
    except ValueError:
        raise IngestError("schema-error", f"unknown operation {op!r}") from None
    try:
        rotation = [float(v) for row in ext["rotation"] for v in row]
        raw = {
            "V": [float(ext["top"]), float(ext["bottom"])],
            "T": [float(v) for v in ext["translation"]],
            "R": rotation,
            "S": [float(ext["scale"])],
            "O": [float(v) for v in ext["scale_center"]],
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise IngestError("schema-error", f"extrusion: {exc}") from None
    if len(raw["T"]) != 3 or len(raw["R"]) != 9 or len(raw["O"]) != 2:
        raise IngestError("schema-error", "extrusion field arity")
    params = []
    for name in ("V", "T", "R", "S", "O"):
        lo, hi = PARAM_RANGES[name]
        params.extend(quantize(v, lo, hi) for v in raw[name])
    return Extrusion(operation, tuple(params))


def ingest(record: dict, check_geometry: bool = True) -> CadModel:
    """Convert one source record into a quantized model.

    Raises IngestError with a reason code (schema-error,
    unsupported-curve, empty-hierarchy, degenerate-geometry) instead of
    crashing on bad input.
    """
    if not isinstance(record, dict):
        raise IngestError("schema-error", f"record is {type(record).__name__}, not an object")
    try:
        bodies_in = record["bodies"]
    except (TypeError, KeyError):
        raise IngestError("schema-error", "record has no bodies") from None
    if not bodies_in or not isinstance(bodies_in, list):
        raise IngestError(
            "schema-error" if not isinstance(bodies_in, list) else "empty-hierarchy",
            "record has no bodies",
        )
    try:
        return _ingest_bodies(bodies_in, check_geometry)
    except IngestError:
        raise
    except (AttributeError, TypeError, KeyError, IndexError, ValueError) as exc:
        raise IngestError("schema-error", str(exc)) from None


def _ingest_bodies(bodies_in: list, check_geometry: bool) -> CadModel:
    bodies = []
    for body in bodies_in:
        faces_in = body.get("faces", [])
        if not faces_in:
            raise IngestError("empty-hierarchy", "sketch has no faces")
        pts = _collect_sketch_points(faces_in)
        if not pts:
            raise IngestError("empty-hierarchy", "sketch has no curves")
        arr = np.array(pts, dtype=float)
        lo = arr.min(axis=0)
        hi = arr.max(axis=0)
        extent = float((hi - lo).max())
        if extent <= 0:
            raise IngestError("degenerate-geometry", "sketch bounds no area")
        center = (lo + hi) / 2
        scale = 2.0 / extent

        def norm_q(pt) -> GridCoord:
            nx = (pt[0] - center[0]) * scale
            ny = (pt[1] - center[1]) * scale
            return GridCoord(quantize(nx, -1.0, 1.0), quantize(ny, -1.0, 1.0))

        faces = []
        for face in faces_in:
            loops_in = face.get("loops", [])
            if not loops_in:
                raise IngestError("empty-hierarchy", "face has no loops")
            loops = []
            for loop in loops_in:
                if not loop:
                    raise IngestError("empty-hierarchy", "loop has no curves")
                curves = []
                for curve in loop:
                    kind = curve["kind"]
                    if kind == "line":
                        curves.append(
                            Curve(CurveKind.LINE, (norm_q(curve["start"]),))
                        )
                    elif kind == "arc":
                        curves.append(
                            Curve(
                                CurveKind.ARC,
                                (norm_q(curve["start"]), norm_q(curve["mid"])),
                            )
                        )
                    else:
                        if len(loop) != 1:
                            raise IngestError(
                                "degenerate-geometry", "circle in a multi-curve loop"
                            )
                        compass = _circle_compass_points(
                            curve["center"], curve["radius"]
                        )
                        curves.append(
                            Curve(
                                CurveKind.CIRCLE, tuple(norm_q(p) for p in compass)
                            )
                        )
                loops.append(Loop(tuple(curves)))
            faces.append(Face(tuple(loops)))
        extrusion = _quantize_extrusion(body.get("extrusion", {}), body.get("operation"))
        bodies.append(SketchExtrusion(Sketch(tuple(faces)), extrusion))
    model = CadModel(tuple(bodies))
    report = validate_model(model)
    if not report.ok:
        raise IngestError("degenerate-geometry", str(report.violations[0]))
    if check_geometry:
        try:
            build_solids(model, RenderConfig())
        except GeometryError as exc:
            raise IngestError("degenerate-geometry", str(exc)) from None
    return model


@dataclass
class Rejection:
    record_id: str
    reason: str
    detail: str = ""


@dataclass
class IngestResult:
    models: list  # (record_id, CadModel) in input order
    rejections: list[Rejection]

    @property
    def stats(self) -> dict:
        reasons = {}
        for r in self.rejections:
            reasons[r.reason] = reasons.get(r.reason, 0) + 1
        return {
            "accepted": len(self.models),
            "rejected": len(self.rejections),
            "reasons": reasons,
        }


def ingest_dataset(records, check_geometry: bool = True, dedup: bool = True) -> IngestResult:
    """Ingest records in order, rejecting invalid ones and, when dedup is
    set, records whose canonical text was already seen."""
    seen = set()
    models = []
    rejections = []
    for record in records:
        if isinstance(record, dict):
            record_id = str(record.get("id", len(models) + len(rejections)))
        else:
            record_id = str(len(models) + len(rejections))
        try:
            model = ingest(record, check_geometry=check_geometry)
        except IngestError as exc:
            rejections.append(Rejection(record_id, exc.reason, exc.detail))
            continue
        digest = canonical_hash(model)
        if dedup and digest in seen:
            rejections.append(Rejection(record_id, "duplicate"))
            continue
        seen.add(digest)
        models.append((record_id, model))
    return IngestResult(models, rejections)


@dataclass
class SplitManifest:
    seed: int
    train: list[str]
    val: list[str]
    test: list[str]
    stats: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed": self.seed,
                "train": self.train,
                "val": self.val,
                "test": self.test,
                "stats": self.stats,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "SplitManifest":
        data = json.loads(text)
        return cls(data["seed"], data["train"], data["val"], data["test"], data.get("stats", {}))


def split(ids: list[str], seed: int, stats: dict | None = None) -> SplitManifest:
    """Seeded 90/5/5 partition of a deduplicated id list."""
    if len(ids) < 20:
        raise CadError(f"refusing to split {len(ids)} ids; need at least 20")
    rng = np.random.default_rng(seed)
    order = [ids[i] for i in rng.permutation(len(ids))]
    n = len(ids)
    n_train = int(round(0.90 * n))
    n_val = int(round(0.05 * n))
    return SplitManifest(
        seed,
        order[:n_train],
        order[n_train : n_train + n_val],
        order[n_train + n_val :],
        stats or {},
    )


def _corpus_levels(mode: str) -> list[Level]:
    if mode == "unconditional-augmented":
        return list(HIERARCHY_LEVELS) + [Level.UNCONDITIONAL]
    return list(HIERARCHY_LEVELS)


def emit_corpus(models, epochs: int, mode: str, seed: int, max_retries: int = 8):
    """Yield corpus example dicts: one per (epoch, model), level sampled
    uniformly from the prompt-template pool.

    `models` is a list of (id, CadModel). Modes: unified (the default
    template pool), random-masking and generic-token (the two masking
    ablations), single-level:<level> (one task only), and
    unconditional-augmented (pool plus the unconditional template).
    Deterministic for a fixed seed; models that repeatedly fail to yield
    a selection are skipped.
    """
    single_level = None
    if mode.startswith("single-level:"):
        single_level = Level(mode.split(":", 1)[1])
    elif mode not in CORPUS_MODES:
        raise CadError(f"unknown corpus mode {mode!r}")
    rng = np.random.default_rng(seed)
    levels = _corpus_levels(mode)
    serialized = {record_id: serialize(model) for record_id, model in models}
    for _epoch in range(epochs):
        for record_id, model in models:
            example = None
            for _ in range(max_retries):
                try:
                    if mode == "random-masking":
                        mt = random_span_mask(serialized[record_id], rng)
                        prompt = build_prompt_for_random_span(mt)
                        level_name = "random-span"
                    else:
                        level = single_level or levels[int(rng.integers(0, len(levels)))]
                        if level is Level.UNCONDITIONAL:
                            prompt = build_prompt(serialized[record_id], level)
                        else:
                            sels = enumerate_selections(model, level)
                            if not sels:
                                continue
                            sel = sels[int(rng.integers(0, len(sels)))]
                            mt = apply_mask(model, sel)
                            if mode == "generic-token":
                                mt = genericize(mt)
                            prompt = build_prompt(mt, level)
                        level_name = level.value
                    example = {
                        "id": record_id,
                        "level": level_name,
                        "instruction": prompt.instruction,
                        "answer": prompt.answer,
                    }
                    break
                except CadError:
                    continue
            if example is not None:
                yield example


def build_prompt_for_random_span(mt):
    from .masking import RANDOM_SPAN_PREAMBLE, PromptExample

    return PromptExample(f"{RANDOM_SPAN_PREAMBLE}\n{mt.raw}", mt.answer_spans[0])


def write_corpus(path, models, epochs: int, mode: str, seed: int) -> int:
    count = 0
    with open(path, "w") as fh:
        for example in emit_corpus(models, epochs, mode, seed):
            fh.write(json.dumps(example) + "\n")
            count += 1
    return count


def read_corpus(path) -> list[dict]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out

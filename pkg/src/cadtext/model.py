"""Domain model for sketch-and-extrude CAD: hierarchy types, coordinate
quantization, structural validation, and canonical hashing.

The hierarchy, bottom up: a curve (line, arc, or circle) is stored as grid
points on a 64x64 grid; curves close into loops; loops bound faces (first
loop outer, the rest holes); faces form a sketch; a sketch plus an
extrusion command makes one 3D body; a model is an ordered list of bodies.

Curve endpoints are implicit: a line stores only its start and an arc its
start and midpoint, the end being the first point of the next curve in the
loop (wrapping to the loop's first curve). A circle stores four points
uniformly spaced on its circumference and is always the only curve of its
loop.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import ModelValidationError, QuantizationError

GRID_SIZE = 64
MAX_COORD = GRID_SIZE - 1

# Fixed dequantization ranges for the 17 numeric extrusion parameters, in
# serialized order: plane displacements V (top, bottom), translation T,
# rotation matrix R (row-major), uniform scale S, scale center O.
PARAM_LAYOUT = (("V", 2), ("T", 3), ("R", 9), ("S", 1), ("O", 2))
PARAM_RANGES = {
    "V": (-1.0, 1.0),
    "T": (-1.0, 1.0),
    "R": (-1.0, 1.0),
    "S": (0.0, 2.0),
    "O": (-1.0, 1.0),
}
NUM_EXTRUSION_PARAMS = 17


def quantize(value: float, lo: float, hi: float) -> int:
    """Quantize a real value into one of 64 bins over [lo, hi].

    Floor binning with the boundary convention that an exact bin edge
    falls into the lower bin, so the midpoint of a symmetric range maps
    to index 31 (the grid center is (31, 31)) and `hi` maps to 63.
    Values outside [lo, hi] are clamped first.
    """
    if not lo < hi:
        raise QuantizationError(f"invalid range: lo={lo} must be < hi={hi}")
    v = min(max(value, lo), hi)
    t = (v - lo) / (hi - lo)
    idx = math.ceil(t * GRID_SIZE) - 1
    return min(max(idx, 0), MAX_COORD)


def dequantize(index: int, lo: float, hi: float) -> float:
    """Map a bin index to its bin center in [lo, hi]."""
    if not lo < hi:
        raise QuantizationError(f"invalid range: lo={lo} must be < hi={hi}")
    return lo + (index + 0.5) * (hi - lo) / GRID_SIZE


class CurveKind(str, Enum):
    LINE = "line"
    ARC = "arc"
    CIRCLE = "circle"


class ExtrudeOp(str, Enum):
    ADD = "add"
    CUT = "cut"
    INTERSECT = "intersect"


POINTS_PER_KIND = {CurveKind.LINE: 1, CurveKind.ARC: 2, CurveKind.CIRCLE: 4}


@dataclass(frozen=True)
class GridCoord:
    """Integer grid point; valid coordinates lie in [0, 63]."""

    x: int
    y: int

    def as_tuple(self) -> tuple[int, int]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Curve:
    kind: CurveKind
    points: tuple[GridCoord, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))


@dataclass(frozen=True)
class Loop:
    curves: tuple[Curve, ...]

    def __post_init__(self):
        object.__setattr__(self, "curves", tuple(self.curves))


@dataclass(frozen=True)
class Face:
    """First loop is the outer boundary; any further loops are holes."""

    loops: tuple[Loop, ...]

    def __post_init__(self):
        object.__setattr__(self, "loops", tuple(self.loops))

    @property
    def outer(self) -> Loop:
        return self.loops[0]

    @property
    def holes(self) -> tuple[Loop, ...]:
        return self.loops[1:]


@dataclass(frozen=True)
class Sketch:
    faces: tuple[Face, ...]

    def __post_init__(self):
        object.__setattr__(self, "faces", tuple(self.faces))


@dataclass(frozen=True)
class Extrusion:
    """18-parameter extrusion command: a boolean op plus 17 quantized ints.

    Parameter order is V(2) T(3) R(9) S(1) O(2): top/bottom plane
    displacements, 3D translation, row-major 3x3 rotation, uniform scale,
    and the 2D center of scaling.
    """

    op: ExtrudeOp
    params: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))

    def dequantized(self) -> dict[str, tuple[float, ...]]:
        """Per-field real values of the 17 params at their bin centers."""
        out = {}
        i = 0
        for name, width in PARAM_LAYOUT:
            lo, hi = PARAM_RANGES[name]
            out[name] = tuple(dequantize(p, lo, hi) for p in self.params[i : i + width])
            i += width
        return out


@dataclass(frozen=True)
class SketchExtrusion:
    sketch: Sketch
    extrusion: Extrusion


@dataclass(frozen=True)
class CadModel:
    bodies: tuple[SketchExtrusion, ...]

    def __post_init__(self):
        object.__setattr__(self, "bodies", tuple(self.bodies))


@dataclass(frozen=True)
class Violation:
    path: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, path: str, message: str):
        self.violations.append(Violation(path, message))


def _check_coord(report: ValidationReport, path: str, pt: GridCoord):
    for axis, v in (("x", pt.x), ("y", pt.y)):
        if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v <= MAX_COORD:
            report.add(path, f"coordinate {axis}={v} outside [0, {MAX_COORD}]")


def validate_model(m: CadModel) -> ValidationReport:
    """Check every structural invariant; violations are data, not failures."""
    report = ValidationReport()
    if not m.bodies:
        report.add("model", "model has no bodies")
    for b, body in enumerate(m.bodies):
        bp = f"body[{b}]"
        sketch = body.sketch
        if not sketch.faces:
            report.add(f"{bp}.sketch", "sketch has no faces")
        for f, face in enumerate(sketch.faces):
            fp = f"{bp}.face[{f}]"
            if not face.loops:
                report.add(fp, "face has no loops")
            for l, loop in enumerate(face.loops):
                lp = f"{fp}.loop[{l}]"
                if not loop.curves:
                    report.add(lp, "loop has no curves")
                    continue
                kinds = [c.kind for c in loop.curves]
                if CurveKind.CIRCLE in kinds and len(loop.curves) > 1:
                    report.add(lp, "circle must be the only curve of its loop")
                for c, curve in enumerate(loop.curves):
                    cp = f"{lp}.curve[{c}]"
                    expected = POINTS_PER_KIND[curve.kind]
                    if len(curve.points) != expected:
                        report.add(
                            cp,
                            f"{curve.kind.value} needs {expected} point(s), "
                            f"got {len(curve.points)}",
                        )
                    for pt in curve.points:
                        _check_coord(report, cp, pt)
        ext = body.extrusion
        ep = f"{bp}.extrusion"
        if not isinstance(ext.op, ExtrudeOp):
            report.add(ep, f"unknown operation {ext.op!r}")
        if len(ext.params) != NUM_EXTRUSION_PARAMS:
            report.add(ep, f"expected {NUM_EXTRUSION_PARAMS} params, got {len(ext.params)}")
        for i, p in enumerate(ext.params):
            if not isinstance(p, int) or isinstance(p, bool) or not 0 <= p <= MAX_COORD:
                report.add(ep, f"param[{i}]={p} outside [0, {MAX_COORD}]")
    return report


def canonical_hash(m: CadModel) -> str:
    """SHA-256 digest of the canonical serialized text.

    Equal models hash equal; any structural or coordinate difference,
    including body order, changes the digest.
    """
    report = validate_model(m)
    if not report.ok:
        raise ModelValidationError(report.violations)
    from .codec import serialize

    return hash_canonical_text(serialize(m).raw)


def hash_canonical_text(text: str) -> str:
    """Digest of an already-canonical CAD text."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()

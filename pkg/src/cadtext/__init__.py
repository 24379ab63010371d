"""Sketch-and-extrude CAD toolkit: structured CAD text, hierarchy-aware
masking, geometry evaluation, and generation-quality metrics."""

from .model import (
    CadModel,
    Curve,
    CurveKind,
    Extrusion,
    ExtrudeOp,
    Face,
    GridCoord,
    Loop,
    Sketch,
    SketchExtrusion,
    canonical_hash,
    dequantize,
    quantize,
    validate_model,
)
from .codec import CadText, parse, serialize, tokenize, validate_text
from .masking import (
    Level,
    MaskSelection,
    MaskedText,
    PromptExample,
    apply_mask,
    build_prompt,
    enumerate_selections,
    infill,
    user_mask,
)

__version__ = "0.1.0"

__all__ = [
    "CadModel",
    "CadText",
    "Curve",
    "CurveKind",
    "Extrusion",
    "ExtrudeOp",
    "Face",
    "GridCoord",
    "Level",
    "Loop",
    "MaskSelection",
    "MaskedText",
    "PromptExample",
    "Sketch",
    "SketchExtrusion",
    "apply_mask",
    "build_prompt",
    "canonical_hash",
    "dequantize",
    "enumerate_selections",
    "infill",
    "parse",
    "quantize",
    "serialize",
    "tokenize",
    "user_mask",
    "validate_model",
    "validate_text",
    "__version__",
]

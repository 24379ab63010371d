"""Hierarchy-aware masking, prompt construction, and infilling.

A mask selection names one parent field in the hierarchy; applying it
replaces every sibling field under that parent with one mask token each
(the masked span includes the field's own end marker). Training prompts
pair the masked text with the removed spans as the answer; predictions are
substituted back with :func:`infill`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from .codec import (
    CadText,
    GENERIC_MASK,
    SEPARATOR,
    SpanIndex,
    Token,
    TokenKind,
    classify,
    model_tokens,
    parse,
    serialize,
    tokenize,
)
from .errors import AlignmentError, InfillError, InvalidPredictionError, ParseError, SelectionError
from .model import CadModel


class Level(str, Enum):
    CAD = "cad"
    SKETCH_EXTRUSION = "sketch-extrusion"
    SKETCH = "sketch"
    EXTRUSION = "extrusion"
    FACE = "face"
    LOOP = "loop"
    CURVE = "curve"
    UNCONDITIONAL = "unconditional"


HIERARCHY_LEVELS = (
    Level.CAD,
    Level.SKETCH_EXTRUSION,
    Level.SKETCH,
    Level.EXTRUSION,
    Level.FACE,
    Level.LOOP,
    Level.CURVE,
)

UNCONDITIONAL_PREAMBLE = "Below is a description of a CAD sequence:"
RANDOM_SPAN_PREAMBLE = "Below is a CAD sequence with a masked span. Infill it:"

_PATH_DEPTH = {
    Level.CAD: 0,
    Level.SKETCH_EXTRUSION: 1,
    Level.SKETCH: 1,
    Level.EXTRUSION: 1,
    Level.FACE: 1,
    Level.LOOP: 2,
    Level.CURVE: 3,
}


def instruction_preamble(level: Level) -> str:
    if level is Level.UNCONDITIONAL:
        return UNCONDITIONAL_PREAMBLE
    return f"Below is a CAD sequence with masked {level.value} fields. Infill them:"


@dataclass(frozen=True)
class MaskSelection:
    """One maskable parent: a level plus the path indices identifying it.

    Path depth per level: cad () / sketch-extrusion, sketch, extrusion,
    face (body,) / loop (body, face) / curve (body, face, loop).
    """

    level: Level
    path: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(self.path))
        depth = _PATH_DEPTH.get(self.level)
        if depth is None:
            raise SelectionError(f"level {self.level.value} has no selections")
        if len(self.path) != depth:
            raise SelectionError(
                f"{self.level.value} selection needs path depth {depth}, "
                f"got {len(self.path)}"
            )


@dataclass(frozen=True)
class MaskedText:
    """Token stream with mask tokens plus the original spans they replaced."""

    tokens: tuple[Token, ...]
    answer_spans: tuple[str, ...]

    @property
    def raw(self) -> str:
        return " ".join(t.text for t in self.tokens)

    @property
    def mask_count(self) -> int:
        return sum(1 for t in self.tokens if t.kind is TokenKind.MASK)


@dataclass(frozen=True)
class PromptExample:
    instruction: str
    answer: str


def enumerate_selections(m: CadModel, level: Level) -> list[MaskSelection]:
    """All mask selections for a model at one level, in document order."""
    if level is Level.UNCONDITIONAL:
        return []
    if level is Level.CAD:
        return [MaskSelection(Level.CAD)]
    sels = []
    for b, body in enumerate(m.bodies):
        if level in (Level.SKETCH_EXTRUSION, Level.SKETCH, Level.EXTRUSION, Level.FACE):
            sels.append(MaskSelection(level, (b,)))
        elif level is Level.LOOP:
            for f in range(len(body.sketch.faces)):
                sels.append(MaskSelection(level, (b, f)))
        elif level is Level.CURVE:
            for f, face in enumerate(body.sketch.faces):
                for l in range(len(face.loops)):
                    sels.append(MaskSelection(level, (b, f, l)))
    return sels


def _selected_spans(index: SpanIndex, sel: MaskSelection):
    """Resolve a selection to (span, mask token text) pairs, in order."""
    try:
        if sel.level is Level.CAD:
            return [(span, "[sketch-extrusion mask]") for span in index.bodies]
        if sel.level is Level.SKETCH_EXTRUSION:
            (b,) = sel.path
            return [(index.bodies[b], "[sketch-extrusion mask]")]
        if sel.level is Level.SKETCH:
            (b,) = sel.path
            return [(index.sketches[b], "[sketch mask]")]
        if sel.level is Level.EXTRUSION:
            (b,) = sel.path
            return [(index.extrusions[b], "[extrusion mask]")]
        if sel.level is Level.FACE:
            (b,) = sel.path
            return [(span, "[face mask]") for span in index.faces[b]]
        if sel.level is Level.LOOP:
            b, f = sel.path
            return [(span, "[loop mask]") for span in index.loops[b][f]]
        if sel.level is Level.CURVE:
            b, f, l = sel.path
            return [
                (span, f"[{kind.value} mask]")
                for span, kind in zip(index.curves[b][f][l], index.curve_kinds[b][f][l])
            ]
    except IndexError:
        raise SelectionError(
            f"path {sel.path} out of range for level {sel.level.value}"
        ) from None
    raise SelectionError(f"level {sel.level.value} has no maskable field")


def _mask_spans(texts: list[str], targets) -> MaskedText:
    """Replace each (span, mask text) target in a token-text list."""
    out_tokens: list[Token] = []
    answers: list[str] = []
    cursor = 0
    for (start, end), mask_text in targets:
        for text in texts[cursor:start]:
            out_tokens.append(classify(text))
        out_tokens.append(Token(TokenKind.MASK, mask_text))
        answers.append(" ".join(texts[start:end]))
        cursor = end
    for text in texts[cursor:]:
        out_tokens.append(classify(text))
    return MaskedText(tuple(out_tokens), tuple(answers))


@lru_cache(maxsize=256)
def _cached_model_tokens(m: CadModel):
    texts, index = model_tokens(m)
    return tuple(texts), index


def apply_mask(m: CadModel, sel: MaskSelection) -> MaskedText:
    """Serialize a model with the selected field(s) replaced by mask tokens."""
    texts, index = _cached_model_tokens(m)
    return _mask_spans(list(texts), _selected_spans(index, sel))


def answers(m: CadModel, sel: MaskSelection) -> tuple[str, ...]:
    """Ground-truth answer spans for a selection (serializer order)."""
    return apply_mask(m, sel).answer_spans


def build_prompt(mt: MaskedText | CadText | str, level: Level) -> PromptExample:
    """Fixed per-level instruction plus the `<sep>`-joined answer.

    At the unconditional level the argument is a plain text; the
    instruction is the bare preamble and the answer the whole text.
    """
    if level is Level.UNCONDITIONAL:
        raw = mt.raw if isinstance(mt, (MaskedText, CadText)) else str(mt)
        return PromptExample(UNCONDITIONAL_PREAMBLE, raw)
    if not isinstance(mt, MaskedText):
        raise TypeError("hierarchy levels require a MaskedText")
    instruction = f"{instruction_preamble(level)}\n{mt.raw}"
    answer = f" {SEPARATOR} ".join(mt.answer_spans)
    return PromptExample(instruction, answer)


_SEP_SPLIT_RE = re.compile(re.escape(SEPARATOR))


def split_prediction(prediction: str) -> list[str]:
    return [seg.strip() for seg in _SEP_SPLIT_RE.split(prediction)]


def infill(mt: MaskedText | str, prediction: str) -> CadText:
    """Substitute prediction segments for mask tokens and reparse.

    The prediction must split on `<sep>` into exactly as many segments as
    there are masks. The infilled text must parse; the canonical text of
    the parsed model is returned.
    """
    if isinstance(mt, MaskedText):
        token_texts = [t.text for t in mt.tokens]
        mask_count = mt.mask_count
        mask_flags = [t.kind is TokenKind.MASK for t in mt.tokens]
    else:
        toks = tokenize(mt)
        token_texts = [t.text for t in toks]
        mask_flags = [t.kind is TokenKind.MASK for t in toks]
        mask_count = sum(mask_flags)
    segments = split_prediction(prediction)
    if len(segments) != mask_count:
        raise InfillError(
            f"prediction has {len(segments)} segment(s) for {mask_count} mask(s)"
        )
    pieces = []
    seg_iter = iter(segments)
    for text, is_mask in zip(token_texts, mask_flags):
        pieces.append(next(seg_iter) if is_mask else text)
    raw = " ".join(p for p in pieces if p)
    try:
        model = parse(raw)
    except Exception as exc:
        raise InvalidPredictionError(
            f"infilled text does not parse: {exc}", cause=exc
        ) from exc
    return serialize(model)


def masked_text_for_model(m: CadModel) -> CadText:
    """Plain serialized text, for unconditional prompts."""
    return serialize(m)


def user_mask(t: CadText | str, token_range: tuple[int, int]) -> MaskedText:
    """Mask one structurally complete field given by a half-open token range.

    Unlike training-time masking, a single sibling may be masked on its
    own. The range must exactly cover one curve, loop, face, sketch,
    extrusion, or body.
    """
    text = t if isinstance(t, CadText) else CadText.from_raw(t)
    model = parse(text)
    texts, index = _cached_model_tokens(model)
    texts = list(texts)
    start, end = token_range
    if not 0 <= start < end <= len(texts):
        raise AlignmentError(f"token range {token_range} out of bounds")
    for span, level, kind in index.all_field_spans():
        if span == (start, end):
            mask = f"[{kind.value} mask]" if level == "curve" else f"[{level} mask]"
            return _mask_spans(texts, [(span, mask)])
    raise AlignmentError(
        f"token range {token_range} does not cover one complete field"
    )


def random_span_mask(
    t: CadText | str, rng, lo: float = 0.15, hi: float = 0.50
) -> MaskedText:
    """Ablation: mask a random contiguous span of lo..hi of the tokens
    with the generic mask token."""
    text = t if isinstance(t, CadText) else CadText.from_raw(t)
    n = len(text.tokens)
    frac = rng.uniform(lo, hi)
    length = max(1, min(n, round(frac * n)))
    start = int(rng.integers(0, n - length + 1))
    texts = [tok.text for tok in text.tokens]
    return _mask_spans(texts, [((start, start + length), GENERIC_MASK)])


def genericize(mt: MaskedText) -> MaskedText:
    """Ablation: replace every hierarchy-specific mask token with [mask]."""
    tokens = tuple(
        Token(TokenKind.MASK, GENERIC_MASK, t.offset) if t.kind is TokenKind.MASK else t
        for t in mt.tokens
    )
    return MaskedText(tokens, mt.answer_spans)

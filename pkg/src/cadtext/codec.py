"""Grammar, serializer, tokenizer, and parser for the structured CAD text.

Canonical surface form, per body::

    <curve tokens> ... loop_end ... face_end ... sketch_end
    <op> <17 ints> extrusion_end

where a curve is ``line x y curve_end``, ``arc x y x y curve_end`` or
``circle x y x y x y x y curve_end``; coordinates and extrusion params are
decimal integers in [0, 63]; tokens are single-space separated; bodies are
concatenated in order. Five end markers exist, one per hierarchy level:
curve, loop, face, sketch, extrusion. There is no body-level marker; a
body is delimited by its ``extrusion_end``.

Masked texts additionally contain bracketed mask tokens such as
``[loop mask]`` or the generic ``[mask]``, each standing for one complete
field including that field's end marker.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import LexicalError, ModelValidationError, ParseError
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
    NUM_EXTRUSION_PARAMS,
    POINTS_PER_KIND,
    Sketch,
    SketchExtrusion,
    validate_model,
)

END_MARKERS = ("curve_end", "loop_end", "face_end", "sketch_end", "extrusion_end")
CURVE_KEYWORDS = tuple(k.value for k in CurveKind)
EXTRUDE_OPS = tuple(o.value for o in ExtrudeOp)
SEPARATOR = "<sep>"
GENERIC_MASK = "[mask]"

# Levels that may appear inside a mask token, e.g. "[face mask]".
MASK_LEVELS = (
    "sketch-extrusion",
    "sketch",
    "extrusion",
    "face",
    "loop",
    "line",
    "arc",
    "circle",
)
MASK_TOKENS = {f"[{lvl} mask]": lvl for lvl in MASK_LEVELS}

_NUMBER_RE = re.compile(r"^(0|[1-9][0-9]?)$")
_TOKEN_RE = re.compile(r"\[(?:[a-z-]+ )?mask\]|\S+")


class TokenKind(Enum):
    CURVE_KW = "curve-kw"
    NUMBER = "number"
    END = "end-marker"
    EXT_OP = "ext-op"
    MASK = "mask-token"
    SEP = "separator"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    offset: int = -1

    @property
    def mask_level(self) -> str | None:
        """Level string of a mask token, or None for the generic [mask]."""
        return MASK_TOKENS.get(self.text)


def classify(text: str, offset: int = -1) -> Token:
    if text in CURVE_KEYWORDS:
        return Token(TokenKind.CURVE_KW, text, offset)
    if text in END_MARKERS:
        return Token(TokenKind.END, text, offset)
    if text in EXTRUDE_OPS:
        return Token(TokenKind.EXT_OP, text, offset)
    if text in MASK_TOKENS or text == GENERIC_MASK:
        return Token(TokenKind.MASK, text, offset)
    if text == SEPARATOR:
        return Token(TokenKind.SEP, text, offset)
    if _NUMBER_RE.match(text):
        value = int(text)
        if value > MAX_COORD:
            raise LexicalError(f"number {value} outside [0, {MAX_COORD}]", offset, text)
        return Token(TokenKind.NUMBER, text, offset)
    if text.isdigit():
        raise LexicalError("non-canonical or out-of-range number", offset, text)
    raise LexicalError("unknown token", offset, text)


def tokenize(raw: str) -> list[Token]:
    """Split a raw string into classified tokens.

    Splits on whitespace except that bracketed mask forms like
    ``[loop mask]`` bind into a single token. Unknown or out-of-range
    tokens raise LexicalError with the byte offset.
    """
    tokens = []
    for match in _TOKEN_RE.finditer(raw):
        offset = len(raw[: match.start()].encode("utf-8"))
        tokens.append(classify(match.group(), offset))
    return tokens


@dataclass(frozen=True)
class CadText:
    """A raw CAD text plus its token sequence (tokens == tokenize(raw))."""

    raw: str
    tokens: tuple[Token, ...]

    @classmethod
    def from_raw(cls, raw: str) -> "CadText":
        return cls(raw, tuple(tokenize(raw)))

    @classmethod
    def from_token_texts(cls, texts: list[str]) -> "CadText":
        # grammar tokens are ASCII, so byte offsets equal char offsets
        tokens = []
        offset = 0
        for text in texts:
            tokens.append(classify(text, offset))
            offset += len(text) + 1
        return cls(" ".join(texts), tuple(tokens))


Span = tuple[int, int]


@dataclass
class SpanIndex:
    """Half-open token spans for every structural field of a serialized model.

    A field's span includes its own end marker, so replacing the span by a
    mask token yields a well-formed masked text.
    """

    bodies: list[Span] = field(default_factory=list)
    sketches: list[Span] = field(default_factory=list)
    extrusions: list[Span] = field(default_factory=list)
    faces: list[list[Span]] = field(default_factory=list)
    loops: list[list[list[Span]]] = field(default_factory=list)
    curves: list[list[list[list[Span]]]] = field(default_factory=list)
    curve_kinds: list[list[list[list[CurveKind]]]] = field(default_factory=list)

    def all_field_spans(self):
        """Yield (span, level, kind) for every maskable field, outermost last."""
        for b, body_span in enumerate(self.bodies):
            for f, face_span in enumerate(self.faces[b]):
                for l, loop_span in enumerate(self.loops[b][f]):
                    for c, curve_span in enumerate(self.curves[b][f][l]):
                        yield curve_span, "curve", self.curve_kinds[b][f][l][c]
                    yield loop_span, "loop", None
                yield face_span, "face", None
            yield self.sketches[b], "sketch", None
            yield self.extrusions[b], "extrusion", None
            yield body_span, "sketch-extrusion", None


def model_tokens(m: CadModel) -> tuple[list[str], SpanIndex]:
    """Emit the canonical token texts for a model along with span indexing."""
    report = validate_model(m)
    if not report.ok:
        raise ModelValidationError(report.violations)
    texts: list[str] = []
    index = SpanIndex()
    for body in m.bodies:
        body_start = len(texts)
        index.faces.append([])
        index.loops.append([])
        index.curves.append([])
        index.curve_kinds.append([])
        for face in body.sketch.faces:
            face_start = len(texts)
            index.loops[-1].append([])
            index.curves[-1].append([])
            index.curve_kinds[-1].append([])
            for loop in face.loops:
                loop_start = len(texts)
                index.curves[-1][-1].append([])
                index.curve_kinds[-1][-1].append([])
                for curve in loop.curves:
                    curve_start = len(texts)
                    texts.append(curve.kind.value)
                    for pt in curve.points:
                        texts.append(str(pt.x))
                        texts.append(str(pt.y))
                    texts.append("curve_end")
                    index.curves[-1][-1][-1].append((curve_start, len(texts)))
                    index.curve_kinds[-1][-1][-1].append(curve.kind)
                texts.append("loop_end")
                index.loops[-1][-1].append((loop_start, len(texts)))
            texts.append("face_end")
            index.faces[-1].append((face_start, len(texts)))
        texts.append("sketch_end")
        index.sketches.append((body_start, len(texts)))
        ext_start = len(texts)
        texts.append(body.extrusion.op.value)
        for p in body.extrusion.params:
            texts.append(str(p))
        texts.append("extrusion_end")
        index.extrusions.append((ext_start, len(texts)))
        index.bodies.append((body_start, len(texts)))
    return texts, index


def serialize(m: CadModel) -> CadText:
    """Canonical structured-text serialization of a valid model."""
    texts, _ = model_tokens(m)
    return CadText.from_token_texts(texts)


class _Parser:
    """Recursive-descent parser over a token list.

    In masked mode, mask tokens are accepted wherever they are structurally
    legal; a generic ``[mask]`` is resolved by looking past the current run
    of mask tokens at the first following token.
    """

    def __init__(self, tokens, allow_masks=False):
        self.tokens = list(tokens)
        self.pos = 0
        self.allow_masks = allow_masks

    def peek(self) -> Token | None:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos]
        return None

    def take(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of text", self.pos)
        self.pos += 1
        return tok

    def expect_end(self, marker: str):
        tok = self.peek()
        if tok is None:
            raise ParseError(f"unexpected end of text, expected {marker}", self.pos)
        if tok.kind is not TokenKind.END or tok.text != marker:
            raise ParseError(f"expected {marker}, found {tok.text!r}", self.pos)
        self.pos += 1

    def _reject_mask(self, tok: Token):
        if tok.kind is TokenKind.MASK and not self.allow_masks:
            raise ParseError(f"mask token {tok.text!r} not allowed here", self.pos)

    def _mask_run_follow(self) -> Token | None:
        """Token immediately after the run of mask tokens at the cursor."""
        j = self.pos
        while j < len(self.tokens) and self.tokens[j].kind is TokenKind.MASK:
            j += 1
        return self.tokens[j] if j < len(self.tokens) else None

    def _mask_run_len(self) -> int:
        j = self.pos
        while j < len(self.tokens) and self.tokens[j].kind is TokenKind.MASK:
            j += 1
        return j - self.pos

    def _generic_stands_for(self) -> str:
        """Infer the field level of a generic [mask] at the cursor from the
        first token after the mask run."""
        follow = self._mask_run_follow()
        if follow is None or follow.kind is TokenKind.CURVE_KW:
            return "sketch-extrusion"
        if follow.kind is TokenKind.EXT_OP:
            # The mask adjacent to the op is a sketch; earlier masks in the
            # run are whole bodies.
            return "sketch" if self._mask_run_len() == 1 else "sketch-extrusion"
        if follow.kind is TokenKind.END:
            return {
                "loop_end": "curve",
                "face_end": "loop",
                "sketch_end": "face",
            }.get(follow.text, "invalid")
        return "invalid"

    # -- grammar --------------------------------------------------------

    def parse_model(self) -> CadModel | None:
        bodies = []
        if self.peek() is None:
            raise ParseError("empty text: a model needs at least one body", 0)
        while self.peek() is not None:
            tok = self.peek()
            if tok.kind not in (TokenKind.CURVE_KW, TokenKind.MASK):
                raise ParseError(f"trailing garbage: unexpected {tok.text!r}", self.pos)
            bodies.append(self.parse_body())
        if self.allow_masks:
            return None
        return CadModel(tuple(bodies))

    def parse_body(self) -> SketchExtrusion | None:
        tok = self.peek()
        self._reject_mask(tok)
        if tok.kind is TokenKind.MASK:
            level = tok.mask_level or self._generic_stands_for()
            if level == "sketch-extrusion":
                self.take()
                return None
            if level == "extrusion":
                raise ParseError("extrusion mask cannot start a body", self.pos)
            if level == "invalid":
                raise ParseError("mask token in no structurally legal position", self.pos)
        sketch = self.parse_sketch()
        extrusion = self.parse_extrusion()
        if self.allow_masks:
            return None
        return SketchExtrusion(sketch, extrusion)

    def parse_sketch(self) -> Sketch | None:
        tok = self.peek()
        if tok is not None and tok.kind is TokenKind.MASK:
            self._reject_mask(tok)
            level = tok.mask_level or self._generic_stands_for()
            if level == "sketch":
                self.take()
                return None
        faces = [self.parse_face()]
        while True:
            tok = self.peek()
            if tok is None:
                raise ParseError("unexpected end of text, expected sketch_end", self.pos)
            if tok.kind is TokenKind.END and tok.text == "sketch_end":
                self.pos += 1
                break
            if tok.kind is TokenKind.CURVE_KW or (
                self.allow_masks and tok.kind is TokenKind.MASK
            ):
                faces.append(self.parse_face())
                continue
            raise ParseError(
                f"expected sketch_end or a curve keyword, found {tok.text!r}", self.pos
            )
        if self.allow_masks:
            return None
        return Sketch(tuple(faces))

    def parse_face(self) -> Face | None:
        tok = self.peek()
        if tok is not None and tok.kind is TokenKind.MASK:
            self._reject_mask(tok)
            level = tok.mask_level or self._generic_stands_for()
            if level == "face":
                self.take()
                return None
            if level not in ("loop", "curve", "line", "arc", "circle"):
                raise ParseError(
                    "mask token in no structurally legal position", self.pos
                )
        loops = [self.parse_loop()]
        while True:
            tok = self.peek()
            if tok is None:
                raise ParseError("unexpected end of text, expected face_end", self.pos)
            if tok.kind is TokenKind.END and tok.text == "face_end":
                self.pos += 1
                break
            if tok.kind is TokenKind.CURVE_KW or (
                self.allow_masks and tok.kind is TokenKind.MASK
            ):
                loops.append(self.parse_loop())
                continue
            raise ParseError(
                f"expected face_end or a curve keyword, found {tok.text!r}", self.pos
            )
        if self.allow_masks:
            return None
        return Face(tuple(loops))

    def parse_loop(self) -> Loop | None:
        tok = self.peek()
        if tok is not None and tok.kind is TokenKind.MASK:
            self._reject_mask(tok)
            level = tok.mask_level or self._generic_stands_for()
            if level == "loop":
                self.take()
                return None
            if level not in ("curve", "line", "arc", "circle"):
                raise ParseError(
                    "mask token in no structurally legal position", self.pos
                )
        curves = [self.parse_curve()]
        while True:
            tok = self.peek()
            if tok is None:
                raise ParseError("unexpected end of text, expected loop_end", self.pos)
            if tok.kind is TokenKind.END and tok.text == "loop_end":
                self.pos += 1
                break
            if tok.kind is TokenKind.CURVE_KW or (
                self.allow_masks and tok.kind is TokenKind.MASK
            ):
                curves.append(self.parse_curve())
                continue
            raise ParseError(
                f"expected loop_end or a curve keyword, found {tok.text!r}", self.pos
            )
        if self.allow_masks:
            return None
        if any(c.kind is CurveKind.CIRCLE for c in curves) and len(curves) > 1:
            raise ParseError("circle must be the only curve of its loop", self.pos - 1)
        return Loop(tuple(curves))

    def parse_curve(self) -> Curve | None:
        tok = self.peek()
        self._reject_mask(tok)
        if tok.kind is TokenKind.MASK:
            level = tok.mask_level or self._generic_stands_for()
            if level in ("line", "arc", "circle", "curve"):
                self.take()
                return None
            raise ParseError("mask token in no structurally legal position", self.pos)
        if tok.kind is not TokenKind.CURVE_KW:
            raise ParseError(f"expected a curve keyword, found {tok.text!r}", self.pos)
        self.pos += 1
        kind = CurveKind(tok.text)
        expected = 2 * POINTS_PER_KIND[kind]
        numbers = []
        while True:
            nxt = self.peek()
            if nxt is None:
                raise ParseError("unexpected end of text, expected curve_end", self.pos)
            if nxt.kind is TokenKind.NUMBER:
                numbers.append(int(nxt.text))
                self.pos += 1
                continue
            break
        if len(numbers) != expected:
            raise ParseError(
                f"{kind.value} takes {POINTS_PER_KIND[kind]} point(s) "
                f"({expected} numbers), got {len(numbers)}",
                self.pos,
            )
        self.expect_end("curve_end")
        if self.allow_masks:
            return None
        points = tuple(
            GridCoord(numbers[i], numbers[i + 1]) for i in range(0, expected, 2)
        )
        return Curve(kind, points)

    def parse_extrusion(self) -> Extrusion | None:
        tok = self.peek()
        if tok is None:
            raise ParseError(
                "unexpected end of text, expected an extrusion op", self.pos
            )
        self._reject_mask(tok)
        if tok.kind is TokenKind.MASK:
            level = tok.mask_level
            if level == "extrusion" or (level is None and tok.text == GENERIC_MASK):
                self.take()
                return None
            raise ParseError("mask token in no structurally legal position", self.pos)
        if tok.kind is not TokenKind.EXT_OP:
            raise ParseError(
                f"expected an extrusion op (add/cut/intersect), found {tok.text!r}",
                self.pos,
            )
        self.pos += 1
        op = ExtrudeOp(tok.text)
        params = []
        for _ in range(NUM_EXTRUSION_PARAMS):
            nxt = self.peek()
            if nxt is None:
                raise ParseError(
                    "unexpected end of text inside extrusion params", self.pos
                )
            if nxt.kind is not TokenKind.NUMBER:
                raise ParseError(
                    f"extrusion takes {NUM_EXTRUSION_PARAMS} params, "
                    f"found {nxt.text!r} after {len(params)}",
                    self.pos,
                )
            params.append(int(nxt.text))
            self.pos += 1
        self.expect_end("extrusion_end")
        if self.allow_masks:
            return None
        return Extrusion(op, tuple(params))


def _as_tokens(t) -> list[Token]:
    if isinstance(t, CadText):
        return list(t.tokens)
    if isinstance(t, str):
        return tokenize(t)
    return list(t)


def parse(t: CadText | str | list[Token]) -> CadModel:
    """Parse a CAD text into the unique model it serializes from.

    Mask tokens are rejected; all arity and nesting rules are enforced.
    Every failure is a ParseError carrying the offending token index.
    """
    return _Parser(_as_tokens(t), allow_masks=False).parse_model()


def validate_text(t: CadText | str | list[Token], allow_masks: bool = False):
    """Report whether a text parses, optionally permitting mask tokens.

    Returns a ValidationReport; lexical and parse failures become
    violations rather than exceptions.
    """
    from .model import ValidationReport

    report = ValidationReport()
    try:
        tokens = _as_tokens(t)
    except LexicalError as exc:
        report.add("text", str(exc))
        return report
    try:
        _Parser(tokens, allow_masks=allow_masks).parse_model()
    except ParseError as exc:
        report.add(f"token[{exc.token_index}]", str(exc))
    return report

"""Word-level vocabulary over the CAD text wire format.

The corpus and prompt files use a closed token set: decimal integers 0-63,
curve keywords, boolean ops, the five end markers, bracketed mask tokens,
the `<sep>` answer separator, and the fixed instruction preamble words.
Bracketed mask forms contain a space and bind into single tokens.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

PAD = "<pad>"
BOS = "<bos>"
EOS = "<eos>"
UNK = "<unk>"
ANSWER_START = "<ans>"

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

_PREAMBLE_WORDS = (
    "Below is a CAD sequence with masked fields. Infill them: "
    "Below is a description of a CAD sequence: "
    "Below is a CAD sequence with a masked span. Infill it:"
).split()

_LEVEL_WORDS = (
    "cad",
    "sketch-extrusion",
    "sketch",
    "extrusion",
    "face",
    "loop",
    "curve",
    "unconditional",
    "random-span",
)

_TOKEN_RE = re.compile(r"\[(?:[a-z-]+ )?mask\]|\S+")


def build_token_list() -> list[str]:
    tokens = [PAD, BOS, EOS, UNK, ANSWER_START, "<sep>"]
    tokens += [str(i) for i in range(64)]
    tokens += ["line", "arc", "circle", "add", "cut", "intersect"]
    tokens += ["curve_end", "loop_end", "face_end", "sketch_end", "extrusion_end"]
    tokens += [f"[{lvl} mask]" for lvl in MASK_LEVELS]
    tokens += ["[mask]"]
    seen = set(tokens)
    for word in _PREAMBLE_WORDS + list(_LEVEL_WORDS):
        if word not in seen:
            tokens.append(word)
            seen.add(word)
    return tokens


@dataclass
class Vocab:
    tokens: list[str]

    def __post_init__(self):
        self.index = {t: i for i, t in enumerate(self.tokens)}
        self.pad_id = self.index[PAD]
        self.bos_id = self.index[BOS]
        self.eos_id = self.index[EOS]
        self.unk_id = self.index[UNK]
        self.ans_id = self.index[ANSWER_START]

    def __len__(self):
        return len(self.tokens)

    def split(self, text: str) -> list[str]:
        return _TOKEN_RE.findall(text)

    def encode(self, text: str) -> list[int]:
        return [self.index.get(w, self.unk_id) for w in self.split(text)]

    def decode(self, ids) -> str:
        words = []
        for i in ids:
            token = self.tokens[int(i)]
            if token in (PAD, BOS, EOS, ANSWER_START):
                continue
            words.append(token)
        return " ".join(words)

    @classmethod
    def default(cls) -> "Vocab":
        return cls(build_token_list())

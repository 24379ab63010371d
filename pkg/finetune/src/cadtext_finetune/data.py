"""Corpus loading and batching.

Corpus lines are the primary toolkit's JSONL records {id, level,
instruction, answer}. Each example becomes
``<bos> instruction <ans> answer <eos>`` with the loss restricted to the
answer tokens (everything after ``<ans>``). Malformed lines are skipped
and counted, never fatal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import torch

from .vocab import Vocab


@dataclass
class Example:
    example_id: str
    ids: list[int]
    answer_start: int  # first position whose PREDICTION is scored


@dataclass
class CorpusStats:
    total_lines: int = 0
    loaded: int = 0
    skipped_malformed: int = 0
    skipped_too_long: int = 0


def load_corpus(path, vocab: Vocab, max_len: int) -> tuple[list[Example], CorpusStats]:
    examples = []
    stats = CorpusStats()
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            stats.total_lines += 1
            try:
                rec = json.loads(line)
                instruction = rec["instruction"]
                answer = rec["answer"]
                example_id = str(rec.get("id", stats.total_lines))
            except (json.JSONDecodeError, KeyError, TypeError):
                stats.skipped_malformed += 1
                continue
            prompt_ids = [vocab.bos_id] + vocab.encode(instruction) + [vocab.ans_id]
            answer_ids = vocab.encode(answer) + [vocab.eos_id]
            if len(prompt_ids) + len(answer_ids) > max_len:
                stats.skipped_too_long += 1
                continue
            examples.append(
                Example(example_id, prompt_ids + answer_ids, len(prompt_ids))
            )
            stats.loaded += 1
    return examples, stats


def check_no_leakage(examples: list[Example], forbidden_ids: set[str]):
    """Guard against training on held-out split ids."""
    leaked = sorted({ex.example_id for ex in examples} & set(forbidden_ids))
    if leaked:
        raise ValueError(
            f"corpus contains {len(leaked)} held-out id(s), e.g. {leaked[:3]}"
        )


def batches(examples: list[Example], batch_size: int, rng: np.random.Generator,
            pad_id: int, shuffle: bool = True):
    """Yield (ids, loss_mask) tensors; loss positions are answer tokens.

    The model predicts token t+1 from position t, so the mask marks
    positions t with answer_start <= t+1 < len (targets = ids shifted)."""
    order = rng.permutation(len(examples)) if shuffle else np.arange(len(examples))
    for start in range(0, len(examples), batch_size):
        chunk = [examples[i] for i in order[start : start + batch_size]]
        width = max(len(ex.ids) for ex in chunk)
        ids = torch.full((len(chunk), width), pad_id, dtype=torch.long)
        mask = torch.zeros((len(chunk), width), dtype=torch.bool)
        for row, ex in enumerate(chunk):
            n = len(ex.ids)
            ids[row, :n] = torch.tensor(ex.ids, dtype=torch.long)
            mask[row, ex.answer_start - 1 : n - 1] = True
        yield ids, mask

"""Prediction sampling: temperature plus nucleus (top-p) decoding.

Prompts are the primary toolkit's prompts.jsonl records {line, level,
instruction}; output is one JSONL record per sample, {line, sample,
prediction}, aligned to prompt line ids. Temperature 0 decodes greedily.
A decode failure records an empty prediction rather than aborting.
"""

from __future__ import annotations

import json
from pathlib import Path

import torch
import torch.nn.functional as F

from .config import SamplingConfig
from .vocab import Vocab


def _filter_top_p(probs: torch.Tensor, top_p: float) -> torch.Tensor:
    """Zero out everything outside the smallest set with mass >= top_p."""
    if top_p >= 1.0:
        return probs
    sorted_probs, order = torch.sort(probs, descending=True, dim=-1)
    cumulative = torch.cumsum(sorted_probs, dim=-1)
    keep_sorted = cumulative - sorted_probs < top_p
    keep_sorted[..., 0] = True
    keep = torch.zeros_like(keep_sorted).scatter(-1, order, keep_sorted)
    filtered = probs * keep
    return filtered / filtered.sum(dim=-1, keepdim=True)


@torch.no_grad()
def generate(
    model,
    vocab: Vocab,
    prompt: str,
    cfg: SamplingConfig,
    num_samples: int | None = None,
    generator: torch.Generator | None = None,
) -> list[str]:
    """Sample completions of a prompt; returns decoded answer strings."""
    model.eval()
    k = num_samples if num_samples is not None else cfg.num_samples
    prompt_ids = [vocab.bos_id] + vocab.encode(prompt) + [vocab.ans_id]
    max_total = model.cfg.max_len
    if len(prompt_ids) >= max_total:
        return [""] * k
    ids = torch.tensor(prompt_ids, dtype=torch.long).repeat(k, 1)
    finished = torch.zeros(k, dtype=torch.bool)
    budget = min(cfg.max_new_tokens, max_total - len(prompt_ids))
    for _ in range(budget):
        logits = model(ids, vocab.pad_id)[:, -1, :]
        if cfg.temperature <= 0:
            nxt = logits.argmax(dim=-1)
        else:
            probs = F.softmax(logits / cfg.temperature, dim=-1)
            probs = _filter_top_p(probs, cfg.top_p)
            nxt = torch.multinomial(probs, 1, generator=generator).squeeze(1)
        nxt = torch.where(finished, torch.full_like(nxt, vocab.pad_id), nxt)
        ids = torch.cat([ids, nxt[:, None]], dim=1)
        finished |= nxt == vocab.eos_id
        if bool(finished.all()):
            break
    out = []
    for row in ids:
        tail = row[len(prompt_ids):].tolist()
        if vocab.eos_id in tail:
            tail = tail[: tail.index(vocab.eos_id)]
        out.append(vocab.decode(tail))
    return out


def sample_file(
    model,
    vocab: Vocab,
    prompts_path,
    out_path,
    cfg: SamplingConfig,
) -> int:
    """Generate cfg.num_samples predictions per prompt record."""
    generator = torch.Generator().manual_seed(cfg.seed)
    written = 0
    with open(prompts_path) as fh:
        prompts = [json.loads(l) for l in fh if l.strip()]
    with open(out_path, "w") as out:
        for rec in prompts:
            line_id = rec.get("line", written)
            try:
                preds = generate(model, vocab, rec["instruction"], cfg, generator=generator)
            except Exception:
                preds = [""] * cfg.num_samples
            for j, pred in enumerate(preds):
                out.write(
                    json.dumps({"line": line_id, "sample": j, "prediction": " ".join(pred.split())})
                    + "\n"
                )
                written += 1
    return written


def sample_checkpoint(checkpoint_path, prompts_path, out_path, cfg: SamplingConfig) -> int:
    from .train import load_checkpoint

    model, vocab, _ = load_checkpoint(checkpoint_path)
    return sample_file(model, vocab, prompts_path, out_path, cfg)

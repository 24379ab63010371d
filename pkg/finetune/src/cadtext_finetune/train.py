"""Training loop: AdamW, cosine-annealed learning rate, answer-only loss.

Checkpoints carry model, optimizer, scheduler, RNG, and log state, so an
interrupted run resumes exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F

from .config import ModelConfig, TrainConfig
from .data import batches, check_no_leakage, load_corpus
from .model import TransformerLM, apply_lora
from .vocab import Vocab

CHECKPOINT_NAME = "checkpoint.pt"
LOG_NAME = "training_log.jsonl"


def build_model(vocab: Vocab, cfg: TrainConfig) -> TransformerLM:
    torch.manual_seed(cfg.seed)
    model = TransformerLM(len(vocab), cfg.model)
    if cfg.backend == "adapter-finetune":
        apply_lora(model, cfg.lora_rank, cfg.lora_alpha)
    return model


def _epoch_loss(model, examples, cfg, rng, pad_id, optimizer, scheduler):
    model.train()
    total = 0.0
    count = 0
    for ids, mask in batches(examples, cfg.batch_size, rng, pad_id):
        optimizer.zero_grad()
        logits = model(ids, pad_id)
        targets = ids[:, 1:]
        pred = logits[:, :-1, :]
        keep = mask[:, :-1]
        loss = F.cross_entropy(pred[keep], targets[keep])
        loss.backward()
        torch.nn.utils.clip_grad_norm_(
            [p for p in model.parameters() if p.requires_grad], 1.0
        )
        optimizer.step()
        scheduler.step()
        total += loss.detach().item() * int(keep.sum())
        count += int(keep.sum())
    return total / max(count, 1)


def train(
    corpus_path,
    out_dir,
    cfg: TrainConfig | None = None,
    forbidden_ids: set[str] | None = None,
    resume: bool = True,
    stop_after: int | None = None,
) -> dict:
    """Fine-tune on a corpus file; returns the final checkpoint payload.

    Loss is computed on answer tokens only. Training aborts on an empty
    corpus and refuses corpora containing held-out ids when
    `forbidden_ids` is given. `stop_after` ends the run early (simulating
    an interruption) while keeping the full cosine horizon; calling again
    with the same config resumes exactly.
    """
    cfg = cfg or TrainConfig()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    vocab = Vocab.default()
    examples, stats = load_corpus(corpus_path, vocab, cfg.model.max_len)
    if not examples:
        raise ValueError(f"corpus {corpus_path} has no usable examples ({stats})")
    if forbidden_ids:
        check_no_leakage(examples, forbidden_ids)

    model = build_model(vocab, cfg)
    trainable = [p for p in model.parameters() if p.requires_grad]
    optimizer = torch.optim.AdamW(trainable, lr=cfg.learning_rate)
    steps_per_epoch = (len(examples) + cfg.batch_size - 1) // cfg.batch_size
    scheduler = torch.optim.lr_scheduler.CosineAnnealingLR(
        optimizer, T_max=max(1, steps_per_epoch * cfg.epochs)
    )
    rng = np.random.default_rng(cfg.seed)
    start_epoch = 0
    log = []

    ckpt_path = out_dir / CHECKPOINT_NAME
    if resume and ckpt_path.exists():
        payload = torch.load(ckpt_path, weights_only=False)
        model.load_state_dict(payload["model"])
        optimizer.load_state_dict(payload["optimizer"])
        scheduler.load_state_dict(payload["scheduler"])
        rng.bit_generator.state = payload["numpy_rng"]
        torch.set_rng_state(payload["torch_rng"])
        start_epoch = payload["epoch"]
        log = payload["log"]

    last_epoch = cfg.epochs if stop_after is None else min(stop_after, cfg.epochs)
    for epoch in range(start_epoch, last_epoch):
        mean_loss = _epoch_loss(model, examples, cfg, rng, vocab.pad_id, optimizer, scheduler)
        entry = {
            "epoch": epoch,
            "loss": mean_loss,
            "lr": scheduler.get_last_lr()[0],
            "examples": len(examples),
            "skipped_malformed": stats.skipped_malformed,
            "skipped_too_long": stats.skipped_too_long,
        }
        log.append(entry)
        with open(out_dir / LOG_NAME, "w") as fh:
            for item in log:
                fh.write(json.dumps(item) + "\n")
        payload = {
            "model": model.state_dict(),
            "optimizer": optimizer.state_dict(),
            "scheduler": scheduler.state_dict(),
            "numpy_rng": rng.bit_generator.state,
            "torch_rng": torch.get_rng_state(),
            "epoch": epoch + 1,
            "log": log,
            "config": cfg.as_dict(),
            "vocab": vocab.tokens,
        }
        torch.save(payload, ckpt_path)
    if stats.skipped_malformed:
        print(f"warning: skipped {stats.skipped_malformed} malformed corpus line(s)")
    return torch.load(ckpt_path, weights_only=False)


def load_checkpoint(path):
    payload = torch.load(path, weights_only=False)
    cfg_dict = dict(payload["config"])
    cfg_dict["model"] = ModelConfig(**cfg_dict["model"])
    cfg = TrainConfig(**cfg_dict)
    vocab = Vocab(payload["vocab"])
    model = TransformerLM(len(vocab), cfg.model)
    if cfg.backend == "adapter-finetune":
        apply_lora(model, cfg.lora_rank, cfg.lora_alpha)
    model.load_state_dict(payload["model"])
    model.eval()
    return model, vocab, cfg

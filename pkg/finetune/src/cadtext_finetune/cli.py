"""Command line for training and sampling.

`train` consumes a corpus JSONL and writes a run directory with a
checkpoint and training log; `sample` reads a prompts JSONL and writes
aligned raw predictions for the primary toolkit to infill and score.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ModelConfig, SamplingConfig, TrainConfig
from .sample import sample_checkpoint
from .train import train


def cmd_train(args) -> int:
    if args.tiny:
        cfg = TrainConfig.tiny(backend=args.backend, seed=args.seed, epochs=args.epochs or 12)
    else:
        cfg = TrainConfig(
            backend=args.backend,
            learning_rate=args.learning_rate,
            batch_size=args.batch_size,
            epochs=args.epochs or 30,
            seed=args.seed,
            lora_rank=args.lora_rank,
            lora_alpha=args.lora_alpha,
        )
    forbidden = None
    if args.manifest:
        manifest = json.loads(Path(args.manifest).read_text())
        forbidden = set(manifest.get("test", [])) | set(manifest.get("val", []))
    payload = train(args.corpus, args.out, cfg, forbidden_ids=forbidden, resume=not args.fresh)
    print(f"trained to epoch {payload['epoch']}, final loss {payload['log'][-1]['loss']:.4f}")
    return 0


def cmd_sample(args) -> int:
    cfg = SamplingConfig(
        temperature=args.temperature,
        top_p=args.top_p,
        max_new_tokens=args.max_new_tokens,
        num_samples=args.num_samples,
        seed=args.seed,
    )
    written = sample_checkpoint(args.checkpoint, args.prompts, args.out, cfg)
    print(f"wrote {written} predictions -> {args.out}")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="cadtext-finetune", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--backend", default="small-from-scratch",
                   choices=["small-from-scratch", "adapter-finetune"])
    p.add_argument("--manifest", help="split manifest; refuses val/test ids")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=5e-4)
    p.add_argument("--lora-rank", type=int, default=8)
    p.add_argument("--lora-alpha", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tiny", action="store_true", help="documented CPU smoke schedule")
    p.add_argument("--fresh", action="store_true", help="ignore existing checkpoint")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sample")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--prompts", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--temperature", type=float, default=1.1)
    p.add_argument("--top-p", type=float, default=0.9)
    p.add_argument("--max-new-tokens", type=int, default=160)
    p.add_argument("--num-samples", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sample)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point.

Subcommands: convert (source records to canonical texts), validate, mask,
infill, render, corpus, eval. Every artifact-producing run writes its
resolved configuration next to the output so results are reproducible;
randomized commands accept --seed (default from CADTEXT_SEED).

Exit codes: 0 success, 2 usage, 3 missing input file, 4 invalid input,
1 unexpected failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .codec import parse, serialize, validate_text
from .dataset import SplitManifest, ingest_dataset, split, write_corpus
from .errors import CadError, InfillError, InvalidPredictionError
from .masking import Level, MaskSelection, apply_mask, build_prompt, infill, user_mask
from .metrics import MetricsConfig, check_renderable, evaluate
from .model import hash_canonical_text
from .geometry.export import write_obj, write_stl, write_voxels, write_xyz
from .geometry.voxel import RenderConfig, build_solids, render_model, sample_point_cloud
from .geometry.solid import TriangleMesh

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISSING_FILE = 3
EXIT_INVALID_INPUT = 4


def _default_seed() -> int:
    return int(os.environ.get("CADTEXT_SEED", "0"))


def _read_lines(path: Path) -> list[str]:
    """One entry per line; interior blanks stay (they score as invalid
    texts), trailing blanks are dropped."""
    with open(path) as fh:
        lines = [line.rstrip("\n") for line in fh]
    while lines and not lines[-1].strip():
        lines.pop()
    return lines


def _write_lines(path: Path, lines: list[str]):
    with open(path, "w") as fh:
        for line in lines:
            fh.write(line + "\n")


def _read_jsonl(path: Path) -> list[dict]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def _write_jsonl(path: Path, records: list[dict]):
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _echo_config(path: Path, args: argparse.Namespace, extra: dict | None = None):
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    config["version"] = __version__
    if extra:
        config.update(extra)
    with open(path, "w") as fh:
        json.dump(config, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def cmd_convert(args) -> int:
    records = _read_jsonl(Path(args.input))
    result = ingest_dataset(records, check_geometry=not args.no_geometry_check)
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    texts = {rid: serialize(m).raw for rid, m in result.models}
    _write_lines(outdir / "all.cadtxt", list(texts.values()))
    _write_jsonl(outdir / "ids.jsonl", [{"id": rid} for rid in texts])
    _write_jsonl(
        outdir / "rejects.jsonl",
        [
            {"id": r.record_id, "reason": r.reason, "detail": r.detail}
            for r in result.rejections
        ],
    )
    stats = result.stats
    if args.split:
        manifest = split(list(texts), seed=args.seed, stats=stats)
        (outdir / "manifest.json").write_text(manifest.to_json() + "\n")
        for name, ids in (
            ("train", manifest.train),
            ("val", manifest.val),
            ("test", manifest.test),
        ):
            _write_lines(outdir / f"{name}.cadtxt", [texts[i] for i in ids])
        _write_lines(
            outdir / "train.hashes",
            [hash_canonical_text(texts[i]) for i in manifest.train],
        )
    else:
        (outdir / "manifest.json").write_text(
            json.dumps({"stats": stats}, indent=2, sort_keys=True) + "\n"
        )
    _echo_config(outdir / "config.json", args, {"stats": stats})
    print(json.dumps(stats, sort_keys=True))
    return EXIT_OK


def cmd_validate(args) -> int:
    lines = _read_lines(Path(args.input))
    failures = 0
    for i, line in enumerate(lines):
        report = validate_text(line, allow_masks=args.allow_masks)
        if report.ok:
            print(f"line {i}: ok")
        else:
            failures += 1
            print(f"line {i}: INVALID {report.violations[0]}")
    print(f"valid {len(lines) - failures}/{len(lines)}")
    return EXIT_OK if failures == 0 else EXIT_INVALID_INPUT


def _selection_from_args(args) -> MaskSelection:
    level = Level(args.level)
    path = []
    if args.body is not None:
        path.append(args.body)
    if args.face is not None:
        path.append(args.face)
    if args.loop is not None:
        path.append(args.loop)
    return MaskSelection(level, tuple(path))


def cmd_mask(args) -> int:
    lines = _read_lines(Path(args.input))
    if args.line is not None:
        indices = [args.line]
    else:
        indices = list(range(len(lines)))
    masked_lines = []
    answers = []
    prompts = []
    for i in indices:
        text = lines[i]
        if args.token_range:
            start, end = (int(x) for x in args.token_range.split(":"))
            mt = user_mask(text, (start, end))
            level = Level(args.level) if args.level else Level.CURVE
        else:
            if not args.level:
                raise CadError("--level is required unless --token-range is given")
            level = Level(args.level)
            model = parse(text)
            mt = apply_mask(model, _selection_from_args(args))
        prompt = build_prompt(mt, level)
        masked_lines.append(mt.raw)
        answers.append({"line": i, "answer": prompt.answer})
        prompts.append({"line": i, "level": level.value, "instruction": prompt.instruction})
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_lines(outdir / "masked.cadtxt", masked_lines)
    _write_jsonl(outdir / "answers.jsonl", answers)
    _write_jsonl(outdir / "prompts.jsonl", prompts)
    _echo_config(outdir / "config.json", args)
    print(f"masked {len(masked_lines)} line(s) -> {outdir}")
    return EXIT_OK


def cmd_infill(args) -> int:
    masked_lines = _read_lines(Path(args.masked))
    predictions = _read_jsonl(Path(args.predictions))
    out_lines = []
    statuses = []
    ok = 0
    # a lone separator token never parses, so failed records keep their
    # output line (and score invalid) instead of vanishing
    invalid_line = "<sep>"
    for k, rec in enumerate(predictions):
        line_index = int(rec.get("line", k))
        if not 0 <= line_index < len(masked_lines):
            statuses.append({"record": k, "line": line_index, "status": "bad-line-index"})
            out_lines.append(invalid_line)
            continue
        try:
            text = infill(masked_lines[line_index], rec["prediction"])
            out_lines.append(text.raw)
            statuses.append({"record": k, "line": line_index, "status": "ok"})
            ok += 1
        except InfillError as exc:
            out_lines.append(invalid_line)
            statuses.append(
                {"record": k, "line": line_index, "status": "segment-mismatch", "error": str(exc)}
            )
        except InvalidPredictionError as exc:
            raw = _raw_substitution(masked_lines[line_index], rec["prediction"])
            out_lines.append(raw if raw.strip() else invalid_line)
            statuses.append(
                {"record": k, "line": line_index, "status": "invalid", "error": str(exc)}
            )
    out_path = Path(args.output)
    _write_lines(out_path, out_lines)
    report = {
        "total": len(predictions),
        "ok": ok,
        "parse_rate": ok / len(predictions) if predictions else 0.0,
        "statuses": statuses,
    }
    Path(args.report).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    _echo_config(Path(str(out_path) + ".config.json"), args)
    print(f"infilled {ok}/{len(predictions)} predictions -> {out_path}")
    return EXIT_OK


def _raw_substitution(masked_line: str, prediction: str) -> str:
    """Best-effort raw text of a failed infill, for downstream scoring."""
    from .masking import split_prediction
    from .codec import tokenize, TokenKind

    try:
        tokens = tokenize(masked_line)
    except CadError:
        return prediction
    segments = split_prediction(prediction)
    pieces = []
    si = 0
    for tok in tokens:
        if tok.kind is TokenKind.MASK and si < len(segments):
            pieces.append(segments[si])
            si += 1
        else:
            pieces.append(tok.text)
    return " ".join(p for p in pieces if p)


def cmd_render(args) -> int:
    lines = _read_lines(Path(args.input))
    if args.line is not None:
        indices = [args.line]
    else:
        indices = list(range(len(lines)))
    formats = args.formats.split(",")
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    cfg = RenderConfig(
        resolution=args.resolution,
        circle_segments=args.circle_segments,
        point_count=args.points,
        seed=args.seed,
    )
    statuses = []
    for i in indices:
        mcfg = MetricsConfig(
            point_count=cfg.point_count,
            voxel_resolution=cfg.resolution,
            circle_segments=cfg.circle_segments,
            seed=cfg.seed,
        )
        outcome = check_renderable(lines[i], mcfg)
        if not outcome.ok:
            statuses.append({"line": i, "status": "invalid", "reason": outcome.reason})
            print(f"line {i}: INVALID ({outcome.reason})")
            continue
        model = parse(lines[i])
        if "obj" in formats or "stl" in formats:
            mesh = TriangleMesh.concatenate([s.mesh for s in build_solids(model, cfg)])
            if "obj" in formats:
                write_obj(mesh, outdir / f"model_{i:05d}.obj")
            if "stl" in formats:
                write_stl(mesh, outdir / f"model_{i:05d}.stl")
        if "voxels" in formats:
            write_voxels(outcome.grid, outdir / f"model_{i:05d}.vox")
        if "points" in formats:
            pts = sample_point_cloud(outcome.grid, cfg.point_count, seed=cfg.seed)
            write_xyz(pts, outdir / f"model_{i:05d}.xyz")
        statuses.append({"line": i, "status": "ok", "occupied": outcome.grid.occupied_count()})
        print(f"line {i}: ok ({outcome.grid.occupied_count()} voxels)")
    _write_jsonl(outdir / "render_report.jsonl", statuses)
    _echo_config(outdir / "config.json", args)
    return EXIT_OK


def cmd_corpus(args) -> int:
    lines = _read_lines(Path(args.input))
    models = [(str(i), parse(line)) for i, line in enumerate(lines)]
    count = write_corpus(Path(args.output), models, args.epochs, args.mode, args.seed)
    _echo_config(Path(str(args.output) + ".config.json"), args)
    print(f"wrote {count} corpus examples -> {args.output}")
    return EXIT_OK


def cmd_eval(args) -> int:
    gen = _read_lines(Path(args.gen))
    ref = _read_lines(Path(args.ref))
    train_hashes = set()
    if args.train_hashes:
        train_hashes = set(_read_lines(Path(args.train_hashes)))
    cfg = MetricsConfig(
        point_count=args.points,
        jsd_resolution=args.jsd_bins,
        voxel_resolution=args.resolution,
        circle_segments=args.circle_segments,
        seed=args.seed,
    )
    report = evaluate(gen, ref, train_hashes, cfg)
    Path(args.report).write_text(report.to_kv())
    _echo_config(Path(str(args.report) + ".config.json"), args)
    print(report.to_table())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cadtext", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="ingest source records into canonical texts")
    p.add_argument("--input", required=True)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--split", action="store_true", help="write 90/5/5 split files")
    p.add_argument("--no-geometry-check", action="store_true")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("validate", help="check texts parse")
    p.add_argument("--input", required=True)
    p.add_argument("--allow-masks", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("mask", help="mask a hierarchy field")
    p.add_argument("--input", required=True)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--level", choices=[l.value for l in Level if l.value != "unconditional"])
    p.add_argument("--body", type=int)
    p.add_argument("--face", type=int)
    p.add_argument("--loop", type=int)
    p.add_argument("--token-range", help="user mask: START:END token indices")
    p.add_argument("--line", type=int, help="only mask this input line")
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("infill", help="substitute predictions into masked texts")
    p.add_argument("--masked", required=True)
    p.add_argument("--predictions", required=True, help="JSONL {line, prediction}")
    p.add_argument("--output", required=True)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_infill)

    p = sub.add_parser("render", help="evaluate texts into meshes/voxels/points")
    p.add_argument("--input", required=True)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--formats", default="obj,voxels,points")
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--circle-segments", type=int, default=32)
    p.add_argument("--points", type=int, default=2000)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--line", type=int)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("corpus", help="emit a fine-tuning corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--epochs", type=int, default=1)
    p.add_argument(
        "--mode",
        default="unified",
        help="unified | random-masking | generic-token | single-level:<level> | unconditional-augmented",
    )
    p.add_argument("--seed", type=int, default=_default_seed())
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("eval", help="compute COV/MMD/JSD/Novel/Unique/PV")
    p.add_argument("--gen", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--train-hashes")
    p.add_argument("--report", required=True)
    p.add_argument("--points", type=int, default=2000)
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--jsd-bins", type=int, default=28)
    p.add_argument("--circle-segments", type=int, default=32)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.set_defaults(func=cmd_eval)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename}", file=sys.stderr)
        return EXIT_MISSING_FILE
    except CadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON input: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())

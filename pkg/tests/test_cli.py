import json

import numpy as np
import pytest

from cadtext.cli import EXIT_INVALID_INPUT, EXIT_MISSING_FILE, EXIT_OK, main
from cadtext.codec import serialize
from cadtext.synth import random_renderable_model, random_source_record


@pytest.fixture
def workspace(tmp_path, rng):
    records = [random_source_record(rng, f"r{i:03d}") for i in range(30)]
    src = tmp_path / "records.jsonl"
    with open(src, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    return tmp_path, src


def run(*argv):
    return main([str(a) for a in argv])


class TestConvert:
    def test_writes_artifacts_and_splits(self, workspace):
        tmp, src = workspace
        out = tmp / "data"
        assert run("convert", "--input", src, "--output-dir", out, "--split", "--seed", 1) == EXIT_OK
        for name in ("all.cadtxt", "train.cadtxt", "val.cadtxt", "test.cadtxt",
                     "train.hashes", "manifest.json", "config.json", "rejects.jsonl"):
            assert (out / name).exists(), name
        manifest = json.loads((out / "manifest.json").read_text())
        assert set(manifest["train"]) | set(manifest["val"]) | set(manifest["test"])

    def test_missing_input(self, tmp_path):
        assert run("convert", "--input", tmp_path / "nope.jsonl", "--output-dir", tmp_path / "o") == EXIT_MISSING_FILE

    def test_reproducible(self, workspace):
        tmp, src = workspace
        a, b = tmp / "a", tmp / "b"
        run("convert", "--input", src, "--output-dir", a, "--split", "--seed", 3)
        run("convert", "--input", src, "--output-dir", b, "--split", "--seed", 3)
        assert (a / "train.cadtxt").read_bytes() == (b / "train.cadtxt").read_bytes()
        assert (a / "all.cadtxt").read_bytes() == (b / "all.cadtxt").read_bytes()


class TestValidate:
    def test_exit_matches_parse_success(self, workspace, tmp_path):
        tmp, src = workspace
        out = tmp / "data"
        run("convert", "--input", src, "--output-dir", out)
        assert run("validate", "--input", out / "all.cadtxt") == EXIT_OK
        bad = tmp_path / "bad.cadtxt"
        bad.write_text("line 0 0 curve_end\n")
        assert run("validate", "--input", bad) == EXIT_INVALID_INPUT


class TestMaskInfill:
    def test_mask_infill_identity(self, workspace):
        tmp, src = workspace
        data = tmp / "data"
        run("convert", "--input", src, "--output-dir", data)
        masked_dir = tmp / "masked"
        assert run("mask", "--input", data / "all.cadtxt", "--output-dir", masked_dir,
                   "--level", "extrusion", "--body", 0) == EXIT_OK
        answers = [json.loads(l) for l in open(masked_dir / "answers.jsonl")]
        preds = tmp / "preds.jsonl"
        with open(preds, "w") as fh:
            for a in answers:
                fh.write(json.dumps({"line": a["line"], "prediction": a["answer"]}) + "\n")
        infilled = tmp / "infilled.cadtxt"
        report = tmp / "report.json"
        assert run("infill", "--masked", masked_dir / "masked.cadtxt",
                   "--predictions", preds, "--output", infilled, "--report", report) == EXIT_OK
        assert infilled.read_bytes() == (data / "all.cadtxt").read_bytes()
        rep = json.loads(report.read_text())
        assert rep["ok"] == rep["total"]
        assert rep["parse_rate"] == 1.0

    def test_invalid_prediction_reported_not_fatal(self, workspace):
        tmp, src = workspace
        data = tmp / "data"
        run("convert", "--input", src, "--output-dir", data)
        masked_dir = tmp / "masked2"
        run("mask", "--input", data / "all.cadtxt", "--output-dir", masked_dir,
            "--level", "loop", "--body", 0, "--face", 0)
        preds = tmp / "badpreds.jsonl"
        with open(preds, "w") as fh:
            fh.write(json.dumps({"line": 0, "prediction": "circle 1 2 curve_end loop_end"}) + "\n")
        infilled = tmp / "bad_infilled.cadtxt"
        report = tmp / "bad_report.json"
        assert run("infill", "--masked", masked_dir / "masked.cadtxt",
                   "--predictions", preds, "--output", infilled, "--report", report) == EXIT_OK
        rep = json.loads(report.read_text())
        assert rep["ok"] == 0
        assert rep["statuses"][0]["status"] == "invalid"

    def test_user_token_range_mask(self, workspace):
        tmp, src = workspace
        data = tmp / "data"
        run("convert", "--input", src, "--output-dir", data)
        masked_dir = tmp / "masked3"
        lines = (data / "all.cadtxt").read_text().splitlines()
        tokens = lines[0].split()
        first_body_end = tokens.index("extrusion_end") + 1
        assert run("mask", "--input", data / "all.cadtxt", "--output-dir", masked_dir,
                   "--line", 0, "--token-range", f"0:{first_body_end}",
                   "--level", "sketch-extrusion") == EXIT_OK
        masked = (masked_dir / "masked.cadtxt").read_text().splitlines()[0]
        assert masked.startswith("[sketch-extrusion mask]")
        assert masked.count("mask") == 1

    def test_selection_out_of_range_is_invalid_input(self, workspace):
        tmp, src = workspace
        data = tmp / "data"
        run("convert", "--input", src, "--output-dir", data)
        code = run("mask", "--input", data / "all.cadtxt", "--output-dir", tmp / "m",
                   "--level", "sketch", "--body", 99)
        assert code == EXIT_INVALID_INPUT


class TestRenderCorpusEval:
    def test_render_outputs(self, workspace):
        tmp, src = workspace
        data = tmp / "data"
        run("convert", "--input", src, "--output-dir", data)
        out = tmp / "render"
        assert run("render", "--input", data / "all.cadtxt", "--line", 0,
                   "--output-dir", out, "--resolution", 24, "--points", 100,
                   "--formats", "obj,stl,voxels,points") == EXIT_OK
        for ext in ("obj", "stl", "vox", "xyz"):
            assert (out / f"model_00000.{ext}").exists()

    def test_corpus_reproducible(self, workspace):
        tmp, src = workspace
        data = tmp / "data"
        run("convert", "--input", src, "--output-dir", data)
        c1, c2 = tmp / "c1.jsonl", tmp / "c2.jsonl"
        assert run("corpus", "--input", data / "all.cadtxt", "--output", c1,
                   "--epochs", 2, "--mode", "unified", "--seed", 5) == EXIT_OK
        run("corpus", "--input", data / "all.cadtxt", "--output", c2,
            "--epochs", 2, "--mode", "unified", "--seed", 5)
        assert c1.read_bytes() == c2.read_bytes()

    def test_eval_self_comparison(self, workspace):
        tmp, src = workspace
        data = tmp / "data"
        run("convert", "--input", src, "--output-dir", data, "--split", "--seed", 2)
        report = tmp / "eval.txt"
        assert run("eval", "--gen", data / "test.cadtxt", "--ref", data / "test.cadtxt",
                   "--train-hashes", data / "train.hashes", "--report", report,
                   "--points", 100, "--resolution", 24) == EXIT_OK
        kv = dict(l.split(None, 1) for l in report.read_text().splitlines() if l)
        assert float(kv["cov"]) == 1.0
        assert float(kv["mmd"]) == 0.0
        assert float(kv["novel"]) == 1.0  # test split is disjoint from train

    def test_eval_reproducible(self, workspace):
        tmp, src = workspace
        data = tmp / "data"
        run("convert", "--input", src, "--output-dir", data, "--split")
        r1, r2 = tmp / "e1.txt", tmp / "e2.txt"
        for r in (r1, r2):
            run("eval", "--gen", data / "val.cadtxt", "--ref", data / "test.cadtxt",
                "--report", r, "--points", 100, "--resolution", 24, "--seed", 7)
        assert r1.read_bytes() == r2.read_bytes()


class TestUsageErrors:
    def test_unknown_flag_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["validate", "--bogus-flag"])
        assert exc.value.code == 2

    def test_unknown_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_config_echo_written(self, workspace):
        tmp, src = workspace
        data = tmp / "data"
        run("convert", "--input", src, "--output-dir", data, "--seed", 9)
        config = json.loads((data / "config.json").read_text())
        assert config["seed"] == 9
        assert config["input"] == str(src)

import math

import numpy as np
import pytest

from conftest import quad_body
from cadtext.codec import serialize
from cadtext.errors import CadError
from cadtext.masking import Level, MaskSelection, apply_mask
from cadtext.metrics import (
    MetricsConfig,
    chamfer,
    check_renderable,
    coverage,
    evaluate,
    jsd,
    mmd,
    novel_unique,
    pairwise_chamfer,
    pv,
)
from cadtext.model import CadModel, hash_canonical_text
from cadtext.synth import random_renderable_model


def chamfer_bruteforce(a, b):
    d = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=-1)
    return float(d.min(axis=1).mean() + d.min(axis=0).mean())


def coverage_bruteforce(gen, ref):
    covered = set()
    for g in gen:
        best = None
        best_d = None
        for j, r in enumerate(ref):
            d = chamfer_bruteforce(g, r)
            if best_d is None or d < best_d:
                best_d = d
                best = j
        covered.add(best)
    return len(covered) / len(ref)


def mmd_bruteforce(gen, ref, scale=100.0):
    total = 0.0
    for r in ref:
        total += min(chamfer_bruteforce(g, r) for g in gen)
    return total / len(ref) * scale


class TestChamfer:
    def test_identity(self, rng):
        x = rng.random((50, 3))
        assert chamfer(x, x) == 0.0

    def test_closed_form(self):
        assert chamfer(np.array([[0.0, 0, 0]]), np.array([[1.0, 0, 0]])) == 2.0

    def test_symmetry(self, rng):
        a = rng.random((30, 3))
        b = rng.random((40, 3))
        assert chamfer(a, b) == pytest.approx(chamfer(b, a), abs=1e-15)

    def test_matches_bruteforce(self, rng):
        for _ in range(10):
            a = rng.random((50, 3))
            b = rng.random((37, 3))
            assert abs(chamfer(a, b) - chamfer_bruteforce(a, b)) < 1e-12

    def test_empty_rejected(self):
        with pytest.raises(CadError):
            chamfer(np.zeros((0, 3)), np.ones((3, 3)))


class TestCoverageMmd:
    def test_self_coverage(self, rng):
        ref = [rng.random((20, 3)) for _ in range(8)]
        assert coverage(ref, ref) == 1.0

    def test_single_gen_covers_one(self, rng):
        ref = [rng.random((20, 3)) for _ in range(8)]
        assert coverage([ref[3]], ref) == pytest.approx(1 / 8)

    def test_matches_bruteforce(self, rng):
        gen = [rng.random((15, 3)) for _ in range(10)]
        ref = [rng.random((15, 3)) for _ in range(10)]
        assert coverage(gen, ref) == pytest.approx(coverage_bruteforce(gen, ref))
        assert mmd(gen, ref) == pytest.approx(mmd_bruteforce(gen, ref), abs=1e-12)

    def test_mmd_identity_and_superset(self, rng):
        ref = [rng.random((20, 3)) for _ in range(5)]
        assert mmd(ref, ref) == 0.0
        gen = ref + [rng.random((20, 3))]
        assert mmd(gen, ref) == 0.0

    def test_tie_break_lowest_index(self):
        cloud = np.zeros((4, 3))
        dists = pairwise_chamfer([cloud], [cloud.copy(), cloud.copy()])
        assert dists[0, 0] == dists[0, 1] == 0.0
        assert coverage([cloud], [cloud.copy(), cloud.copy()]) == 0.5


class TestJsd:
    def test_identity(self, rng):
        p = [rng.random((200, 3)) - 0.5]
        assert jsd(p, p) == 0.0

    def test_symmetric(self, rng):
        p = [rng.random((100, 3)) - 0.5]
        q = [rng.random((100, 3)) - 0.5]
        assert jsd(p, q) == pytest.approx(jsd(q, p), abs=1e-12)

    def test_disjoint_single_bins(self):
        a = [np.full((10, 3), -0.4)]
        b = [np.full((10, 3), 0.4)]
        assert jsd(a, b) == pytest.approx(math.log(2) * 100)

    def test_bounded_by_ln2(self, rng):
        for _ in range(5):
            p = [rng.random((50, 3)) - 0.5]
            q = [rng.random((50, 3)) - 0.5]
            assert 0.0 <= jsd(p, q) <= math.log(2) * 100 + 1e-12


class TestNovelUnique:
    def make_texts(self):
        a = serialize(CadModel((quad_body(0, 0, 10, 10),))).raw
        b = serialize(CadModel((quad_body(5, 5, 20, 20),))).raw
        c = serialize(CadModel((quad_body(1, 1, 30, 30),))).raw
        return a, b, c

    def test_novel_half(self):
        a, _, c = self.make_texts()
        novel, _, bad = novel_unique([a, c], {hash_canonical_text(a)})
        assert novel == 0.5
        assert bad == []

    def test_unique_third(self):
        a, b, _ = self.make_texts()
        _, unique, _ = novel_unique([a, a, b], set())
        assert unique == pytest.approx(1 / 3)

    def test_all_from_train(self):
        a, b, _ = self.make_texts()
        train = {hash_canonical_text(a), hash_canonical_text(b)}
        novel, _, _ = novel_unique([a, b, a], train)
        assert novel == 0.0

    def test_unparseable_excluded_and_reported(self):
        a, b, _ = self.make_texts()
        novel, unique, bad = novel_unique([a, "garbage in", b], set())
        assert bad == [1]
        assert novel == 1.0
        assert unique == 1.0

    def test_permutation_invariant(self, rng):
        a, b, c = self.make_texts()
        texts = [a, a, b, c]
        train = {hash_canonical_text(c)}
        base = novel_unique(texts, train)[:2]
        for _ in range(5):
            perm = [texts[i] for i in rng.permutation(len(texts))]
            assert novel_unique(perm, train)[:2] == base

    def test_whitespace_variant_same_hash(self):
        a, _, _ = self.make_texts()
        novel, unique, _ = novel_unique([a, "  " + a.replace(" ", "  ")], set())
        assert unique == 0.0


class TestPv:
    def cfg(self):
        return MetricsConfig(point_count=100, voxel_resolution=24)

    def test_ground_truth_answers_give_pv_one(self):
        m = CadModel((quad_body(),))
        mt = apply_mask(m, MaskSelection(Level.SKETCH, (0,)))
        assert pv([" <sep> ".join(mt.answer_spans)], [mt], self.cfg()) == 1.0

    def test_zero_thickness_counted_invalid(self):
        text = serialize(CadModel((quad_body(v_top=31, v_bot=31),))).raw
        assert pv([text], cfg=self.cfg()) == 0.0

    def test_garbage_counted_invalid(self):
        assert pv(["not a cad text"], cfg=self.cfg()) == 0.0

    def test_check_renderable_reasons(self):
        ok = check_renderable(serialize(CadModel((quad_body(),))).raw, self.cfg())
        assert ok.ok
        bad = check_renderable("line 0", self.cfg())
        assert not bad.ok and bad.reason.startswith("parse")


class TestEvaluate:
    def test_self_comparison(self, rng):
        texts = [serialize(random_renderable_model(rng)).raw for _ in range(5)]
        cfg = MetricsConfig(point_count=200, voxel_resolution=24)
        rep = evaluate(texts, texts, {hash_canonical_text(t) for t in texts}, cfg)
        assert rep.cov == 1.0
        assert rep.mmd == 0.0
        assert rep.jsd == 0.0
        assert rep.novel == 0.0
        assert rep.pv == 1.0

    def test_ranges_on_random_sets(self, rng):
        gen = [serialize(random_renderable_model(rng)).raw for _ in range(6)]
        ref = [serialize(random_renderable_model(rng)).raw for _ in range(6)]
        cfg = MetricsConfig(point_count=150, voxel_resolution=24)
        rep = evaluate(gen, ref, set(), cfg)
        for value in (rep.cov, rep.novel, rep.unique, rep.pv):
            assert 0.0 <= value <= 1.0
        assert rep.mmd >= 0.0
        assert 0.0 <= rep.jsd <= math.log(2) * 100 + 1e-9

    def test_deterministic_per_seed(self, rng):
        gen = [serialize(random_renderable_model(rng)).raw for _ in range(4)]
        ref = [serialize(random_renderable_model(rng)).raw for _ in range(4)]
        cfg = MetricsConfig(point_count=100, voxel_resolution=24, seed=5)
        r1 = evaluate(gen, ref, set(), cfg)
        r2 = evaluate(gen, ref, set(), cfg)
        assert r1.to_kv() == r2.to_kv()

    def test_unparseable_gen_counts_against_pv(self, rng):
        gen = [serialize(random_renderable_model(rng)).raw for _ in range(3)]
        ref = list(gen)
        cfg = MetricsConfig(point_count=100, voxel_resolution=24)
        rep = evaluate(gen + ["garbage"], ref, set(), cfg)
        assert rep.pv == pytest.approx(3 / 4)
        assert rep.n_gen_unparseable == 1

    def test_kv_report_round_trip(self, rng):
        gen = [serialize(random_renderable_model(rng)).raw for _ in range(3)]
        cfg = MetricsConfig(point_count=100, voxel_resolution=24)
        rep = evaluate(gen, gen, set(), cfg)
        parsed = rep.parse_kv(rep.to_kv())
        assert float(parsed["cov"]) == rep.cov
        assert parsed["config.point_count"] == "100"

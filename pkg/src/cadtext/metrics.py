"""Generation-quality metrics: COV, MMD, JSD, Novel, Unique, PV.

Distribution metrics compare point clouds sampled from rendered solids;
the chamfer distance uses squared nearest-neighbor distances in both
directions, computed exactly. Novel and Unique are exact-match text
metrics over canonical hashes. PV is the fraction of predictions whose
infilled text parses and renders into a non-empty solid with non-zero
thickness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .codec import parse, serialize
from .errors import CadError, GeometryError, InfillError, InvalidPredictionError
from .masking import MaskedText, infill
from .model import hash_canonical_text
from .geometry.voxel import RenderConfig, render_model, sample_point_cloud

LN2 = math.log(2.0)


@dataclass
class MetricsConfig:
    point_count: int = 2000
    jsd_resolution: int = 28
    voxel_resolution: int = 64
    circle_segments: int = 32
    mmd_scale: float = 100.0
    jsd_scale: float = 100.0
    chamfer_variant: str = "squared"
    seed: int = 0

    def __post_init__(self):
        if self.point_count <= 0:
            raise ValueError("point_count must be positive")
        if self.jsd_resolution < 8:
            raise ValueError("jsd_resolution must be >= 8")

    def render_config(self) -> RenderConfig:
        return RenderConfig(
            resolution=self.voxel_resolution,
            circle_segments=self.circle_segments,
            point_count=self.point_count,
            seed=self.seed,
        )

    def as_dict(self) -> dict:
        return {
            "point_count": self.point_count,
            "jsd_resolution": self.jsd_resolution,
            "voxel_resolution": self.voxel_resolution,
            "circle_segments": self.circle_segments,
            "mmd_scale": self.mmd_scale,
            "jsd_scale": self.jsd_scale,
            "chamfer_variant": self.chamfer_variant,
            "seed": self.seed,
        }


def chamfer(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric mean squared nearest-neighbor distance between clouds."""
    a = np.asarray(a, dtype=float).reshape(-1, 3)
    b = np.asarray(b, dtype=float).reshape(-1, 3)
    if len(a) == 0 or len(b) == 0:
        raise CadError("chamfer distance needs non-empty point clouds")
    d_ab, _ = cKDTree(b).query(a, k=1)
    d_ba, _ = cKDTree(a).query(b, k=1)
    return float(np.mean(d_ab**2) + np.mean(d_ba**2))


def pairwise_chamfer(gen: list[np.ndarray], ref: list[np.ndarray]) -> np.ndarray:
    if not gen or not ref:
        raise CadError("point cloud sets must be non-empty")
    out = np.zeros((len(gen), len(ref)))
    for i, g in enumerate(gen):
        for j, r in enumerate(ref):
            out[i, j] = chamfer(g, r)
    return out


def coverage_from_matrix(dists: np.ndarray) -> float:
    """Fraction of reference clouds that are someone's nearest neighbor;
    argmin ties resolve to the lowest reference index."""
    covered = set(int(j) for j in np.argmin(dists, axis=1))
    return len(covered) / dists.shape[1]


def mmd_from_matrix(dists: np.ndarray, scale: float = 100.0) -> float:
    return float(np.min(dists, axis=0).mean()) * scale


def coverage(gen: list[np.ndarray], ref: list[np.ndarray]) -> float:
    return coverage_from_matrix(pairwise_chamfer(gen, ref))


def mmd(gen: list[np.ndarray], ref: list[np.ndarray], scale: float = 100.0) -> float:
    """Minimum matching distance: mean over ref of the closest gen cloud."""
    return mmd_from_matrix(pairwise_chamfer(gen, ref), scale)


def _occupancy_histogram(clouds: list[np.ndarray], resolution: int) -> np.ndarray:
    counts = np.zeros((resolution,) * 3, dtype=float)
    for cloud in clouds:
        pts = np.asarray(cloud, dtype=float).reshape(-1, 3)
        idx = np.floor((pts + 0.5) * resolution).astype(int)
        idx = np.clip(idx, 0, resolution - 1)
        np.add.at(counts, (idx[:, 0], idx[:, 1], idx[:, 2]), 1.0)
    return counts


def _kl(p: np.ndarray, q: np.ndarray) -> float:
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def jsd(
    gen: list[np.ndarray],
    ref: list[np.ndarray],
    resolution: int = 28,
    scale: float = 100.0,
) -> float:
    """Jensen-Shannon divergence between the occupancy histograms of the
    two cloud sets over the unit cube, natural log."""
    if not gen or not ref:
        raise CadError("point cloud sets must be non-empty")
    p = _occupancy_histogram(gen, resolution).ravel()
    q = _occupancy_histogram(ref, resolution).ravel()
    p = p / p.sum()
    q = q / q.sum()
    m = (p + q) / 2
    return (0.5 * _kl(p, m) + 0.5 * _kl(q, m)) * scale


def novel_unique(
    gen_texts: list[str], train_hashes: set[str]
) -> tuple[float, float, list[int]]:
    """(novel fraction, unique fraction, indices of unparseable texts).

    Unparseable texts are excluded from both denominators.
    """
    if not gen_texts:
        raise CadError("generated set must be non-empty")
    hashes = []
    bad = []
    for i, text in enumerate(gen_texts):
        try:
            hashes.append(hash_canonical_text(serialize(parse(text)).raw))
        except CadError:
            bad.append(i)
    if not hashes:
        return 0.0, 0.0, bad
    counts = {}
    for h in hashes:
        counts[h] = counts.get(h, 0) + 1
    novel = sum(1 for h in hashes if h not in train_hashes) / len(hashes)
    unique = sum(1 for h in hashes if counts[h] == 1) / len(hashes)
    return novel, unique, bad


@dataclass
class RenderOutcome:
    ok: bool
    reason: str = ""
    grid: object = None


def check_renderable(text: str, cfg: MetricsConfig | None = None) -> RenderOutcome:
    """Operationalized prediction validity for one full CAD text: it must
    parse and render to non-empty occupancy with non-zero thickness."""
    cfg = cfg or MetricsConfig()
    try:
        model = parse(text)
    except CadError as exc:
        return RenderOutcome(False, f"parse: {exc}")
    try:
        grid = render_model(model, cfg.render_config())
    except GeometryError as exc:
        return RenderOutcome(False, f"geometry: {exc}")
    if grid.empty:
        return RenderOutcome(False, "empty occupancy")
    return RenderOutcome(True, grid=grid)


def pv(
    predictions: list[str],
    contexts: list[MaskedText | str | None] | None = None,
    cfg: MetricsConfig | None = None,
) -> float:
    """Fraction of predictions that infill and render into a 3D shape.

    A context of None scores the prediction as a complete CAD text.
    """
    cfg = cfg or MetricsConfig()
    if contexts is None:
        contexts = [None] * len(predictions)
    if len(predictions) != len(contexts):
        raise CadError("predictions and contexts must align")
    if not predictions:
        raise CadError("predictions must be non-empty")
    ok = 0
    for pred, ctx in zip(predictions, contexts):
        if ctx is None:
            text = pred
        else:
            try:
                text = infill(ctx, pred).raw
            except (InfillError, InvalidPredictionError, CadError):
                continue
        if check_renderable(text, cfg).ok:
            ok += 1
    return ok / len(predictions)


@dataclass
class MetricsReport:
    cov: float
    mmd: float
    jsd: float
    novel: float
    unique: float
    pv: float
    n_gen: int
    n_ref: int
    n_gen_rendered: int
    n_ref_rendered: int
    n_gen_unparseable: int
    config: dict = field(default_factory=dict)

    def to_kv(self) -> str:
        lines = []
        for key in ("cov", "mmd", "jsd", "novel", "unique", "pv"):
            lines.append(f"{key} {getattr(self, key):.6f}")
        for key in (
            "n_gen",
            "n_ref",
            "n_gen_rendered",
            "n_ref_rendered",
            "n_gen_unparseable",
        ):
            lines.append(f"{key} {getattr(self, key)}")
        for key in sorted(self.config):
            lines.append(f"config.{key} {self.config[key]}")
        return "\n".join(lines) + "\n"

    def to_table(self) -> str:
        header = f"{'COV':>8} {'MMD':>8} {'JSD':>8} {'Novel':>8} {'Unique':>8} {'PV':>8}"
        row = (
            f"{self.cov * 100:7.1f}% {self.mmd:8.3f} {self.jsd:8.3f} "
            f"{self.novel * 100:7.1f}% {self.unique * 100:7.1f}% {self.pv * 100:7.1f}%"
        )
        return f"{header}\n{row}"

    @staticmethod
    def parse_kv(text: str) -> dict:
        out = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            key, value = line.split(None, 1)
            out[key] = value
        return out


def _text_seed(text: str, base_seed: int) -> int:
    """Per-text sampling seed derived from content, so equal texts yield
    equal clouds regardless of file position."""
    digest = hash_canonical_text(text)
    return (int(digest[:16], 16) ^ (base_seed * 0x9E3779B97F4A7C15)) % (2**63)


def _render_set(texts: list[str], cfg: MetricsConfig):
    """Render texts to point clouds; returns (clouds, rendered flags,
    unparseable count)."""
    clouds = []
    flags = []
    unparseable = 0
    for text in texts:
        outcome = check_renderable(text, cfg)
        if not outcome.ok:
            flags.append(False)
            if outcome.reason.startswith("parse"):
                unparseable += 1
            continue
        cloud = sample_point_cloud(
            outcome.grid, cfg.point_count, seed=_text_seed(text, cfg.seed)
        )
        clouds.append(cloud)
        flags.append(True)
    return clouds, flags, unparseable


def evaluate(
    gen_texts: list[str],
    ref_texts: list[str],
    train_hashes: set[str] | None = None,
    cfg: MetricsConfig | None = None,
) -> MetricsReport:
    """Full metric suite of a generated set against a reference set.

    Texts that fail to parse or render are excluded from the distribution
    metrics but count against PV; Novel/Unique skip unparseable texts.
    Deterministic for a fixed config seed.
    """
    cfg = cfg or MetricsConfig()
    if not gen_texts or not ref_texts:
        raise CadError("generated and reference sets must be non-empty")
    gen_clouds, gen_flags, gen_unparseable = _render_set(gen_texts, cfg)
    ref_clouds, ref_flags, _ = _render_set(ref_texts, cfg)
    if not gen_clouds or not ref_clouds:
        raise CadError("no renderable texts in one of the sets")
    dists = pairwise_chamfer(gen_clouds, ref_clouds)
    novel, unique, _ = novel_unique(gen_texts, train_hashes or set())
    return MetricsReport(
        cov=coverage_from_matrix(dists),
        mmd=mmd_from_matrix(dists, cfg.mmd_scale),
        jsd=jsd(gen_clouds, ref_clouds, cfg.jsd_resolution, cfg.jsd_scale),
        novel=novel,
        unique=unique,
        pv=sum(gen_flags) / len(gen_texts),
        n_gen=len(gen_texts),
        n_ref=len(ref_texts),
        n_gen_rendered=sum(gen_flags),
        n_ref_rendered=sum(ref_flags),
        n_gen_unparseable=gen_unparseable,
        config=cfg.as_dict(),
    )

"""Voxel rendering of models, boolean composition, and point sampling.

Bodies are voxelized in document order into a shared grid spanning the
model's normalized bounding cube and combined left to right: add is set
union, cut set difference, intersect set intersection. An empty final
occupancy is a reportable outcome, not an exception.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptySolidError, GeometryError
from ..model import CadModel, ExtrudeOp
from .solid import BodySolid, extrude


@dataclass
class RenderConfig:
    resolution: int = 64
    circle_segments: int = 32
    point_count: int = 2000
    seed: int = 0

    def as_dict(self) -> dict:
        return {
            "resolution": self.resolution,
            "circle_segments": self.circle_segments,
            "point_count": self.point_count,
            "seed": self.seed,
        }


@dataclass
class VoxelGrid:
    """Cubic occupancy grid over an axis-aligned bounding cube."""

    resolution: int
    origin: np.ndarray
    edge: float
    bits: np.ndarray = field(default=None)

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float).reshape(3)
        if self.edge <= 0:
            raise ValueError("voxel grid bounds are degenerate")
        if self.bits is None:
            r = self.resolution
            self.bits = np.zeros((r, r, r), dtype=bool)

    @property
    def voxel_width(self) -> float:
        return self.edge / self.resolution

    def occupied_count(self) -> int:
        return int(self.bits.sum())

    @property
    def empty(self) -> bool:
        return not self.bits.any()

    def centers(self) -> np.ndarray:
        r = self.resolution
        w = self.voxel_width
        axis = self.origin[None, :] + (np.arange(r)[:, None] + 0.5) * w
        ii, jj, kk = np.meshgrid(np.arange(r), np.arange(r), np.arange(r), indexing="ij")
        pts = np.stack(
            [axis[ii.ravel(), 0], axis[jj.ravel(), 1], axis[kk.ravel(), 2]], axis=1
        )
        return pts

    def like(self, bits: np.ndarray) -> "VoxelGrid":
        return VoxelGrid(self.resolution, self.origin.copy(), self.edge, bits)

    def union(self, other: "VoxelGrid") -> "VoxelGrid":
        return self.like(self.bits | other.bits)

    def difference(self, other: "VoxelGrid") -> "VoxelGrid":
        return self.like(self.bits & ~other.bits)

    def intersection(self, other: "VoxelGrid") -> "VoxelGrid":
        return self.like(self.bits & other.bits)

    def surface_mask(self) -> np.ndarray:
        """Occupied voxels with at least one empty 6-neighbor (grid
        boundary counts as empty)."""
        padded = np.pad(self.bits, 1, constant_values=False)
        interior = np.ones_like(self.bits)
        for axis in range(3):
            for shift in (-1, 1):
                interior &= np.roll(padded, shift, axis=axis)[1:-1, 1:-1, 1:-1]
        return self.bits & ~interior

    def volume(self) -> float:
        return self.occupied_count() * self.voxel_width**3


def apply_op(op: ExtrudeOp, acc: np.ndarray, body: np.ndarray) -> np.ndarray:
    if op is ExtrudeOp.ADD:
        return acc | body
    if op is ExtrudeOp.CUT:
        return acc & ~body
    return acc & body


def build_solids(m: CadModel, cfg: RenderConfig | None = None) -> list[BodySolid]:
    """Extrude every body, tagging failures with the body index."""
    cfg = cfg or RenderConfig()
    solids = []
    for b, body in enumerate(m.bodies):
        try:
            solids.append(
                extrude(body.sketch, body.extrusion, circle_segments=cfg.circle_segments)
            )
        except GeometryError as exc:
            raise type(exc)(str(exc), body_index=b) from exc
    return solids


def model_bounding_cube(solids: list[BodySolid]) -> tuple[np.ndarray, float]:
    los = np.stack([s.mesh.aabb()[0] for s in solids]).min(axis=0)
    his = np.stack([s.mesh.aabb()[1] for s in solids]).max(axis=0)
    center = (los + his) / 2
    edge = float((his - los).max())
    if edge <= 0:
        edge = 1.0
    return center - edge / 2, edge


def voxelize_solid(
    solid: BodySolid, origin: np.ndarray, edge: float, resolution: int
) -> np.ndarray:
    grid = VoxelGrid(resolution, origin, edge)
    return solid.contains(grid.centers()).reshape((resolution,) * 3)


def render_model(m: CadModel, cfg: RenderConfig | None = None) -> VoxelGrid:
    """Voxelize a model inside its normalized bounding cube.

    Geometry failures carry the offending body index; an all-empty result
    is returned as an empty grid for the caller to report.
    """
    cfg = cfg or RenderConfig()
    solids = build_solids(m, cfg)
    origin, edge = model_bounding_cube(solids)
    grid = VoxelGrid(cfg.resolution, origin, edge)
    acc = grid.bits
    for body, solid in zip(m.bodies, solids):
        bits = voxelize_solid(solid, origin, edge, cfg.resolution)
        acc = apply_op(body.extrusion.op, acc, bits)
    return grid.like(acc)


def sample_point_cloud(
    g: VoxelGrid, n: int, seed: int = 0, normalize: bool = True
) -> np.ndarray:
    """Sample n points on the voxel surface, jittered within voxels,
    centered and uniformly scaled into the unit cube (world coordinates
    when normalize is off)."""
    if g.empty:
        raise EmptySolidError("cannot sample points from an empty grid")
    surface = np.argwhere(g.surface_mask())
    rng = np.random.default_rng(seed)
    picks = surface[rng.integers(0, len(surface), size=n)]
    jitter = rng.random((n, 3))
    pts = g.origin + (picks + jitter) * g.voxel_width
    if not normalize:
        return pts
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    center = (lo + hi) / 2
    extent = float((hi - lo).max())
    if extent < 1e-12:
        return pts - center
    return (pts - center) / extent

"""Curve and loop tessellation in grid units.

Curves are evaluated in the sketch's 64x64 grid coordinate system (indices
as reals). A curve's end point is implicit: it is the first point of the
next curve in the loop, wrapping to the loop's first curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateCurveError
from ..model import Curve, CurveKind, GridCoord, Loop

MIN_ARC_SEGMENTS = 8
RADIANS_PER_SEGMENT = 0.1


@dataclass(frozen=True)
class Polyline2D:
    """Ordered 2D point sequence; closed polylines repeat the first point."""

    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "points", np.asarray(self.points, dtype=float).reshape(-1, 2)
        )

    @property
    def closed(self) -> bool:
        return len(self.points) > 1 and bool(
            np.all(self.points[0] == self.points[-1])
        )


def grid_point(pt: GridCoord) -> np.ndarray:
    return np.array([float(pt.x), float(pt.y)])


def circumcenter(a, b, c):
    """Center of the circle through three points, or None if collinear."""
    ax, ay = a
    bx, by = b
    cx, cy = c
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if abs(d) < 1e-12:
        return None
    ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay)
          + (cx * cx + cy * cy) * (ay - by)) / d
    uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx)
          + (cx * cx + cy * cy) * (bx - ax)) / d
    return np.array([ux, uy])


def fit_circle(points: np.ndarray) -> tuple[np.ndarray, float]:
    """Circle through points assumed uniformly spaced on a circumference:
    center is their centroid, radius the mean distance to it."""
    pts = np.asarray(points, dtype=float)
    center = pts.mean(axis=0)
    radius = float(np.linalg.norm(pts - center, axis=1).mean())
    return center, radius


def arc_segment_count(angle: float) -> int:
    """Segments for an arc subtending `angle` radians."""
    return max(MIN_ARC_SEGMENTS, math.ceil(abs(angle) / RADIANS_PER_SEGMENT))


def arc_sweep(start, mid, end):
    """(center, radius, start angle, signed sweep) of the arc start->mid->end."""
    center = circumcenter(start, mid, end)
    if center is None:
        raise DegenerateCurveError("arc points are collinear (no circumcircle)")
    radius = float(np.linalg.norm(np.asarray(start, dtype=float) - center))
    a0 = math.atan2(start[1] - center[1], start[0] - center[0])
    a1 = math.atan2(mid[1] - center[1], mid[0] - center[0])
    a2 = math.atan2(end[1] - center[1], end[0] - center[0])
    ccw_mid = (a1 - a0) % (2 * math.pi)
    ccw_end = (a2 - a0) % (2 * math.pi)
    if ccw_end == 0.0:
        ccw_end = 2 * math.pi
    if ccw_mid < ccw_end:
        sweep = ccw_end
    else:
        sweep = ccw_end - 2 * math.pi
    return center, radius, a0, sweep


def tessellate_curve(c: Curve, next_start: GridCoord, segments: int) -> Polyline2D:
    """Sample a curve into a polyline.

    Lines yield [start, end]; arcs are sampled uniformly by angle through
    their midpoint; circles become a closed polyline around the four-point
    fit. `segments` must be >= 1 for lines and >= 8 for arcs and circles.
    """
    if c.kind is CurveKind.LINE:
        if segments < 1:
            raise ValueError("line tessellation needs segments >= 1")
        return Polyline2D(np.stack([grid_point(c.points[0]), grid_point(next_start)]))
    if segments < MIN_ARC_SEGMENTS:
        raise ValueError(f"arc/circle tessellation needs segments >= {MIN_ARC_SEGMENTS}")
    if c.kind is CurveKind.ARC:
        start = grid_point(c.points[0])
        mid = grid_point(c.points[1])
        end = grid_point(next_start)
        center, radius, a0, sweep = arc_sweep(start, mid, end)
        angles = a0 + sweep * np.linspace(0.0, 1.0, segments + 1)
        pts = center + radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
        pts[0] = start
        pts[-1] = end
        return Polyline2D(pts)
    # circle
    pts4 = np.stack([grid_point(p) for p in c.points])
    center, radius = fit_circle(pts4)
    if radius < 1e-9:
        raise DegenerateCurveError("circle has zero radius")
    a0 = math.atan2(pts4[0][1] - center[1], pts4[0][0] - center[0])
    angles = a0 + 2 * math.pi * np.arange(segments + 1) / segments
    pts = center + radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    pts[-1] = pts[0]
    return Polyline2D(pts)


def default_segments(c: Curve, next_start: GridCoord, circle_segments: int) -> int:
    """Angle-adaptive segment count: fixed for circles, swept-angle scaled
    for arcs, one segment for lines."""
    if c.kind is CurveKind.LINE:
        return 1
    if c.kind is CurveKind.CIRCLE:
        return circle_segments
    _, _, _, sweep = arc_sweep(
        grid_point(c.points[0]), grid_point(c.points[1]), grid_point(next_start)
    )
    return arc_segment_count(sweep)


def loop_polyline(loop: Loop, circle_segments: int = 32) -> Polyline2D:
    """Closed polyline of a loop (first point repeated at the end)."""
    if len(loop.curves) == 1 and loop.curves[0].kind is CurveKind.CIRCLE:
        return tessellate_curve(loop.curves[0], loop.curves[0].points[0], circle_segments)
    parts = []
    n = len(loop.curves)
    for i, curve in enumerate(loop.curves):
        nxt = loop.curves[(i + 1) % n].points[0]
        segs = default_segments(curve, nxt, circle_segments)
        poly = tessellate_curve(curve, nxt, segs)
        parts.append(poly.points[:-1])
    pts = np.concatenate(parts + [parts[0][:1]], axis=0)
    return Polyline2D(pts)

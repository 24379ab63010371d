"""Polygons with holes: validity checks and triangulation.

Rings are stored open (no repeated last vertex), outer counterclockwise,
holes clockwise. Validation rejects self-intersecting rings and holes not
strictly inside the outer boundary; both count against prediction
validity downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateCurveError, InvalidFaceError
from ..model import Face
from . import _earclip
from .tessellate import loop_polyline


def signed_area(ring: np.ndarray) -> float:
    x = ring[:, 0]
    y = ring[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _clean_ring(points: np.ndarray) -> np.ndarray:
    """Drop repeated and exactly collinear consecutive vertices."""
    pts = [tuple(p) for p in points]
    changed = True
    while changed and len(pts) > 2:
        changed = False
        out = []
        n = len(pts)
        for i in range(n):
            p, q, r = pts[i - 1], pts[i], pts[(i + 1) % n]
            if q == r:
                changed = True
                continue
            cross = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
            if cross == 0.0 and q != p:
                changed = True
                continue
            out.append(q)
        pts = out
    return np.array(pts, dtype=float).reshape(-1, 2)


def _segments(ring: np.ndarray):
    return np.stack([ring, np.roll(ring, -1, axis=0)], axis=1)


def _proper_intersection(p1, q1, p2, q2) -> bool:
    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    d1 = cross(p2, q2, p1)
    d2 = cross(p2, q2, q1)
    d3 = cross(p1, q1, p2)
    d4 = cross(p1, q1, q2)
    return ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    )


def ring_is_simple(ring: np.ndarray) -> bool:
    """No two non-adjacent edges properly cross."""
    segs = _segments(ring)
    n = len(segs)
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _proper_intersection(segs[i][0], segs[i][1], segs[j][0], segs[j][1]):
                return False
    return True


def points_in_ring(points: np.ndarray, ring: np.ndarray) -> np.ndarray:
    """Even-odd containment of each point in a single ring (vectorized)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    x = pts[:, 0][:, None]
    y = pts[:, 1][:, None]
    x1 = ring[:, 0][None, :]
    y1 = ring[:, 1][None, :]
    x2 = np.roll(ring[:, 0], -1)[None, :]
    y2 = np.roll(ring[:, 1], -1)[None, :]
    straddle = (y1 > y) != (y2 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x1 + (y - y1) * (x2 - x1) / np.where(y2 == y1, np.inf, y2 - y1)
    crossings = np.sum(straddle & (xint > x), axis=1)
    return crossings % 2 == 1


def point_strictly_in_ring(point, ring: np.ndarray, eps: float = 1e-9) -> bool:
    px, py = float(point[0]), float(point[1])
    a = ring
    b = np.roll(ring, -1, axis=0)
    d = b - a
    t = np.clip(
        ((px - a[:, 0]) * d[:, 0] + (py - a[:, 1]) * d[:, 1])
        / np.maximum((d * d).sum(axis=1), 1e-300),
        0.0,
        1.0,
    )
    nearest = a + t[:, None] * d
    dist2 = ((nearest[:, 0] - px) ** 2 + (nearest[:, 1] - py) ** 2).min()
    if dist2 < eps * eps:
        return False
    return bool(points_in_ring(np.array([[px, py]]), ring)[0])


@dataclass(frozen=True)
class PolygonWithHoles:
    """Outer ring (CCW) plus hole rings (CW), all open."""

    outer: np.ndarray
    holes: tuple[np.ndarray, ...] = ()

    def area(self) -> float:
        return signed_area(self.outer) + sum(signed_area(h) for h in self.holes)

    def rings(self) -> list[np.ndarray]:
        return [self.outer, *self.holes]

    def vertices(self) -> np.ndarray:
        return np.concatenate(self.rings(), axis=0)

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Even-odd containment across all rings; holes cancel the outer."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        inside = points_in_ring(pts, self.outer)
        for hole in self.holes:
            inside ^= points_in_ring(pts, hole)
        return inside

    def triangulate(self) -> tuple[np.ndarray, np.ndarray]:
        """(vertices, triangle index triples); triangles are CCW."""
        tris = _earclip.triangulate(self.rings())
        return self.vertices(), np.array(tris, dtype=int).reshape(-1, 3)


def face_to_polygons(f: Face, circle_segments: int = 32) -> PolygonWithHoles:
    """Tessellate a face into a validated polygon with holes.

    The outer loop is normalized counterclockwise and holes clockwise.
    Raises InvalidFaceError on degenerate boundaries, self-intersections,
    or holes not strictly inside the outer loop.
    """
    rings = []
    for loop in f.loops:
        poly = loop_polyline(loop, circle_segments=circle_segments)
        ring = _clean_ring(poly.points[:-1] if poly.closed else poly.points)
        if len(ring) < 3:
            raise InvalidFaceError("loop collapses to fewer than 3 distinct points")
        rings.append(ring)
    outer = rings[0]
    if abs(signed_area(outer)) < 1e-12:
        raise InvalidFaceError("outer loop bounds no area")
    if not ring_is_simple(outer):
        raise InvalidFaceError("outer loop self-intersects")
    if signed_area(outer) < 0:
        outer = outer[::-1].copy()
    holes = []
    outer_segs = _segments(outer)
    for k, ring in enumerate(rings[1:]):
        if abs(signed_area(ring)) < 1e-12:
            raise InvalidFaceError(f"hole {k} bounds no area")
        if not ring_is_simple(ring):
            raise InvalidFaceError(f"hole {k} self-intersects")
        if signed_area(ring) > 0:
            ring = ring[::-1].copy()
        for pt in ring:
            if not point_strictly_in_ring(pt, outer):
                raise InvalidFaceError(f"hole {k} is not strictly inside the outer loop")
        ring_segs = _segments(ring)
        for s in ring_segs:
            for t in outer_segs:
                if _proper_intersection(s[0], s[1], t[0], t[1]):
                    raise InvalidFaceError(f"hole {k} crosses the outer loop")
        holes.append(ring)
    return PolygonWithHoles(outer, tuple(holes))

"""Extrusion of sketches into prism solids.

The 2D profile is mapped from grid units into the sketch frame [-1, 1]^2
(bin centers of the 64-grid), scaled uniformly about the scale center,
swept between the bottom and top plane displacements along the local z
axis, rotated by the re-orthonormalized rotation matrix, and translated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ZeroThicknessError
from ..model import Extrusion, GRID_SIZE, Sketch
from .polygon import PolygonWithHoles, face_to_polygons

ZERO_THICKNESS_EPS = 1e-9


def grid_to_frame(points: np.ndarray) -> np.ndarray:
    """Map grid-unit coordinates to [-1, 1] bin centers."""
    return (np.asarray(points, dtype=float) + 0.5) * (2.0 / GRID_SIZE) - 1.0


def orthonormalize(matrix: np.ndarray) -> np.ndarray:
    """Nearest orthonormal matrix (proper rotation, det +1)."""
    u, _, vt = np.linalg.svd(np.asarray(matrix, dtype=float).reshape(3, 3))
    r = u @ vt
    if np.linalg.det(r) < 0:
        u[:, -1] *= -1
        r = u @ vt
    return r


@dataclass(frozen=True)
class TriangleMesh:
    vertices: np.ndarray
    faces: np.ndarray

    def volume(self) -> float:
        """Signed volume; positive for outward-oriented closed meshes."""
        v = self.vertices
        a = v[self.faces[:, 0]]
        b = v[self.faces[:, 1]]
        c = v[self.faces[:, 2]]
        return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)

    def is_watertight(self) -> bool:
        """Every undirected edge shared by exactly two triangles with
        opposite directions."""
        edges = {}
        for tri in self.faces:
            for i in range(3):
                a, b = int(tri[i]), int(tri[(i + 1) % 3])
                if a == b:
                    return False
                key = (min(a, b), max(a, b))
                edges.setdefault(key, []).append(a < b)
        for directions in edges.values():
            if len(directions) != 2 or directions[0] == directions[1]:
                return False
        return True

    def aabb(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    @staticmethod
    def concatenate(meshes: list["TriangleMesh"]) -> "TriangleMesh":
        verts = []
        faces = []
        offset = 0
        for m in meshes:
            verts.append(m.vertices)
            faces.append(m.faces + offset)
            offset += len(m.vertices)
        return TriangleMesh(np.concatenate(verts), np.concatenate(faces))


@dataclass(frozen=True)
class ExtrusionTransform:
    """Dequantized extrusion parameters ready for geometry."""

    z_bottom: float
    z_top: float
    rotation: np.ndarray
    translation: np.ndarray
    scale: float
    scale_center: np.ndarray

    @classmethod
    def from_extrusion(cls, e: Extrusion) -> "ExtrusionTransform":
        dq = e.dequantized()
        v_top, v_bottom = dq["V"]
        lo, hi = sorted((v_top, v_bottom))
        return cls(
            z_bottom=lo,
            z_top=hi,
            rotation=orthonormalize(np.array(dq["R"]).reshape(3, 3)),
            translation=np.array(dq["T"]),
            scale=dq["S"][0],
            scale_center=np.array(dq["O"]),
        )

    @property
    def thickness(self) -> float:
        return self.z_top - self.z_bottom

    def profile_to_local(self, grid_points: np.ndarray) -> np.ndarray:
        """Grid-unit profile points to scaled sketch-frame coordinates."""
        frame = grid_to_frame(grid_points)
        return self.scale_center + self.scale * (frame - self.scale_center)

    def local_to_world(self, local: np.ndarray) -> np.ndarray:
        return local @ self.rotation.T + self.translation

    def world_to_local(self, world: np.ndarray) -> np.ndarray:
        return (world - self.translation) @ self.rotation


@dataclass(frozen=True)
class BodySolid:
    """One extruded body: scaled profile polygons plus placement.

    `polygons` live in the scaled sketch frame; the solid is their sweep
    over [z_bottom, z_top], placed by rotation and translation. `mesh` is
    the watertight prism mesh (one prism per face) in world coordinates.
    """

    polygons: tuple[PolygonWithHoles, ...]
    transform: ExtrusionTransform
    mesh: TriangleMesh

    def contains(self, world_points: np.ndarray) -> np.ndarray:
        pts = np.asarray(world_points, dtype=float).reshape(-1, 3)
        local = self.transform.world_to_local(pts)
        z = local[:, 2]
        inside = (z >= self.transform.z_bottom) & (z <= self.transform.z_top)
        if inside.any():
            planar = np.zeros(inside.sum(), dtype=bool)
            xy = local[inside, :2]
            for poly in self.polygons:
                planar |= poly.contains(xy)
            result = np.zeros(len(pts), dtype=bool)
            result[np.flatnonzero(inside)] = planar
            return result
        return np.zeros(len(pts), dtype=bool)


def _prism_mesh(poly: PolygonWithHoles, z0: float, z1: float) -> TriangleMesh:
    verts2d, cap_tris = poly.triangulate()
    n = len(verts2d)
    bottom = np.column_stack([verts2d, np.full(n, z0)])
    top = np.column_stack([verts2d, np.full(n, z1)])
    vertices = np.concatenate([bottom, top])
    faces = []
    for a, b, c in cap_tris:
        faces.append((a, c, b))
        faces.append((a + n, b + n, c + n))
    offset = 0
    for ring in poly.rings():
        length = len(ring)
        for i in range(length):
            a = offset + i
            b = offset + (i + 1) % length
            faces.append((a, b, b + n))
            faces.append((a, b + n, a + n))
        offset += length
    return TriangleMesh(vertices, np.array(faces, dtype=int))


def extrude(s: Sketch, e: Extrusion, circle_segments: int = 32) -> BodySolid:
    """Evaluate one sketch-extrusion body into a solid.

    Raises ZeroThicknessError when the top and bottom planes coincide and
    InvalidFaceError / DegenerateCurveError for bad profile geometry.
    """
    t = ExtrusionTransform.from_extrusion(e)
    if t.thickness < ZERO_THICKNESS_EPS:
        raise ZeroThicknessError("extrusion has zero thickness")
    polygons = []
    meshes = []
    for face in s.faces:
        grid_poly = face_to_polygons(face, circle_segments=circle_segments)
        outer = t.profile_to_local(grid_poly.outer)
        holes = tuple(t.profile_to_local(h) for h in grid_poly.holes)
        poly = PolygonWithHoles(outer, holes)
        polygons.append(poly)
        local_mesh = _prism_mesh(poly, t.z_bottom, t.z_top)
        meshes.append(
            TriangleMesh(t.local_to_world(local_mesh.vertices), local_mesh.faces)
        )
    return BodySolid(tuple(polygons), t, TriangleMesh.concatenate(meshes))

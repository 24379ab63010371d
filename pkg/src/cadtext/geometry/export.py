"""Mesh, voxel, and point-cloud file writers.

OBJ and binary STL for meshes, a run-length-encoded text format for voxel
occupancy, and XYZ text for point clouds.
"""

from __future__ import annotations

import struct

import numpy as np

from .solid import TriangleMesh
from .voxel import VoxelGrid

VOX_MAGIC = "voxrle v1"


def write_obj(mesh: TriangleMesh, path):
    with open(path, "w") as fh:
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for f in mesh.faces:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")


def write_stl(mesh: TriangleMesh, path):
    tris = mesh.vertices[mesh.faces]
    normals = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    lengths = np.linalg.norm(normals, axis=1, keepdims=True)
    normals = np.divide(normals, np.where(lengths == 0, 1, lengths))
    with open(path, "wb") as fh:
        fh.write(b"\0" * 80)
        fh.write(struct.pack("<I", len(tris)))
        for n, tri in zip(normals, tris):
            fh.write(struct.pack("<3f", *n))
            for v in tri:
                fh.write(struct.pack("<3f", *v))
            fh.write(struct.pack("<H", 0))


def write_voxels(grid: VoxelGrid, path):
    """Run lengths of the C-order flattened occupancy, starting with an
    empty run."""
    flat = grid.bits.ravel()
    runs = []
    current = False
    count = 0
    for bit in flat:
        if bit == current:
            count += 1
        else:
            runs.append(count)
            current = not current
            count = 1
    runs.append(count)
    with open(path, "w") as fh:
        fh.write(f"{VOX_MAGIC}\n")
        fh.write(f"resolution {grid.resolution}\n")
        ox, oy, oz = grid.origin
        fh.write(f"bounds {ox:.9g} {oy:.9g} {oz:.9g} {grid.edge:.9g}\n")
        fh.write("runs " + " ".join(str(r) for r in runs) + "\n")


def read_voxels(path) -> VoxelGrid:
    with open(path) as fh:
        magic = fh.readline().strip()
        if magic != VOX_MAGIC:
            raise ValueError(f"not a {VOX_MAGIC} file")
        resolution = int(fh.readline().split()[1])
        parts = fh.readline().split()
        origin = np.array([float(parts[1]), float(parts[2]), float(parts[3])])
        edge = float(parts[4])
        runs = [int(x) for x in fh.readline().split()[1:]]
    flat = np.zeros(resolution**3, dtype=bool)
    pos = 0
    value = False
    for run in runs:
        if value:
            flat[pos : pos + run] = True
        pos += run
        value = not value
    return VoxelGrid(resolution, origin, edge, flat.reshape((resolution,) * 3))


def write_xyz(points: np.ndarray, path):
    with open(path, "w") as fh:
        for p in np.asarray(points).reshape(-1, 3):
            fh.write(f"{p[0]:.9g} {p[1]:.9g} {p[2]:.9g}\n")


def read_xyz(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(x) for x in line.split()])
    return np.array(rows, dtype=float).reshape(-1, 3)

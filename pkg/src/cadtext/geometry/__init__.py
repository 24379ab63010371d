"""Geometry kernel: tessellation, polygons, extrusion, voxels, export."""

from .tessellate import (
    Polyline2D,
    arc_segment_count,
    circumcenter,
    fit_circle,
    loop_polyline,
    tessellate_curve,
)
from .polygon import PolygonWithHoles, face_to_polygons, signed_area
from .solid import BodySolid, ExtrusionTransform, TriangleMesh, extrude, orthonormalize
from .voxel import (
    RenderConfig,
    VoxelGrid,
    build_solids,
    render_model,
    sample_point_cloud,
    voxelize_solid,
)

__all__ = [
    "BodySolid",
    "ExtrusionTransform",
    "PolygonWithHoles",
    "Polyline2D",
    "RenderConfig",
    "TriangleMesh",
    "VoxelGrid",
    "arc_segment_count",
    "build_solids",
    "circumcenter",
    "extrude",
    "face_to_polygons",
    "fit_circle",
    "loop_polyline",
    "orthonormalize",
    "render_model",
    "sample_point_cloud",
    "signed_area",
    "tessellate_curve",
    "voxelize_solid",
]

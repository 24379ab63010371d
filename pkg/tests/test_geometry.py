import math

import numpy as np
import pytest

from conftest import arc, body, line, quad_body, quad_loop
from cadtext.errors import (
    DegenerateCurveError,
    EmptySolidError,
    InvalidFaceError,
    ZeroThicknessError,
)
from cadtext.geometry import (
    PolygonWithHoles,
    RenderConfig,
    TriangleMesh,
    VoxelGrid,
    build_solids,
    extrude,
    face_to_polygons,
    fit_circle,
    loop_polyline,
    render_model,
    sample_point_cloud,
    tessellate_curve,
    voxelize_solid,
)
from cadtext.geometry.polygon import signed_area
from cadtext.geometry.voxel import model_bounding_cube
from cadtext.model import (
    CadModel,
    Curve,
    CurveKind,
    Extrusion,
    ExtrudeOp,
    Face,
    GridCoord,
    Loop,
    Sketch,
    SketchExtrusion,
)
from cadtext.synth import (
    IDENTITY_ROTATION_PARAMS,
    circle_loop,
    random_renderable_model,
)


def perpendicular_bisector_circumcenter(p0, p1, p2):
    """Independent circumcenter oracle: solve the two bisector equations."""
    p0, p1, p2 = (np.asarray(p, dtype=float) for p in (p0, p1, p2))
    a = np.stack([p1 - p0, p2 - p0])
    b = np.array(
        [
            (p1 @ p1 - p0 @ p0) / 2,
            (p2 @ p2 - p0 @ p0) / 2,
        ]
    )
    return np.linalg.solve(a, b)


def cross2(u, v):
    return u[0] * v[1] - u[1] * v[0]


def triangle_area_sum(verts, tris):
    total = 0.0
    for i, j, k in tris:
        total += cross2(verts[j] - verts[i], verts[k] - verts[i]) / 2
    return total


class TestTessellate:
    def test_line(self):
        poly = tessellate_curve(line(0, 0), GridCoord(10, 0), 1)
        assert np.allclose(poly.points, [[0, 0], [10, 0]])

    def test_arc_points_equidistant_from_circumcenter_oracle(self):
        curve = arc(0, 0, 31, 31)
        poly = tessellate_curve(curve, GridCoord(63, 0), 64)
        center = perpendicular_bisector_circumcenter((0, 0), (31, 31), (63, 0))
        radii = np.linalg.norm(poly.points - center, axis=1)
        assert np.all(np.abs(radii - radii[0]) / radii[0] <= 1e-9)
        assert np.allclose(poly.points[0], [0, 0])
        assert np.allclose(poly.points[-1], [63, 0])

    def test_arc_passes_through_midpoint(self):
        poly = tessellate_curve(arc(0, 0, 31, 31), GridCoord(63, 0), 64)
        center = perpendicular_bisector_circumcenter((0, 0), (31, 31), (63, 0))
        radius = np.linalg.norm(np.array([0.0, 0.0]) - center)
        # the stored midpoint lies on the fitted circle and the sampling
        # walks past it within one sample spacing
        assert abs(np.linalg.norm(np.array([31.0, 31.0]) - center) - radius) < 1e-9
        spacing = radius * (2 * math.pi) / 64
        dists = np.linalg.norm(poly.points - np.array([31.0, 31.0]), axis=1)
        assert dists.min() <= spacing

    def test_circle_fit_example(self):
        pts = np.array([[31, 15], [47, 31], [31, 47], [15, 31]], dtype=float)
        center, radius = fit_circle(pts)
        assert np.allclose(center, [31, 31])
        assert radius == pytest.approx(16.0)

    def test_circle_polyline_closed(self):
        poly = loop_polyline(circle_loop(31, 31, 16), circle_segments=32)
        assert poly.closed
        assert len(poly.points) == 33

    def test_collinear_arc(self):
        with pytest.raises(DegenerateCurveError):
            tessellate_curve(arc(0, 0, 10, 0), GridCoord(20, 0), 8)

    def test_segment_minimums(self):
        with pytest.raises(ValueError):
            tessellate_curve(arc(0, 0, 10, 5), GridCoord(20, 0), 4)


class TestFaceToPolygons:
    def test_square_two_triangles(self):
        poly = face_to_polygons(Face((quad_loop(0, 0, 10, 10),)))
        verts, tris = poly.triangulate()
        assert len(tris) == 2
        assert triangle_area_sum(verts, tris) == pytest.approx(100.0)

    def test_square_with_circular_hole_area(self):
        face = Face((quad_loop(4, 4, 60, 60), circle_loop(32, 32, 12)))
        poly = face_to_polygons(face, circle_segments=32)
        verts, tris = poly.triangulate()
        analytic = 56.0 * 56.0 - math.pi * 12.0**2
        assert abs(triangle_area_sum(verts, tris) - analytic) / analytic < 0.02

    def test_hole_outside_outer(self):
        face = Face((quad_loop(0, 0, 20, 20), circle_loop(50, 50, 5)))
        with pytest.raises(InvalidFaceError):
            face_to_polygons(face)

    def test_self_intersecting_outer(self):
        bowtie = Loop((line(0, 0), line(10, 10), line(10, 0), line(0, 10)))
        with pytest.raises(InvalidFaceError):
            face_to_polygons(Face((bowtie,)))

    def test_orientation_normalized(self):
        cw = Loop((line(0, 0), line(0, 10), line(10, 10), line(10, 0)))
        poly = face_to_polygons(Face((cw,)))
        assert signed_area(poly.outer) > 0
        face = Face((quad_loop(0, 0, 40, 40), quad_loop(10, 10, 30, 30)))
        poly = face_to_polygons(face)
        assert signed_area(poly.holes[0]) < 0

    def test_degenerate_loop(self):
        l = Loop((line(5, 5), line(5, 5), line(5, 5)))
        with pytest.raises(InvalidFaceError):
            face_to_polygons(Face((l,)))

    def test_triangulation_area_property_random_faces(self, rng):
        for _ in range(120):
            m = random_renderable_model(rng)
            for b in m.bodies:
                for face in b.sketch.faces:
                    poly = face_to_polygons(face)
                    verts, tris = poly.triangulate()
                    assert triangle_area_sum(verts, tris) == pytest.approx(
                        poly.area(), rel=1e-9
                    )
                    for i, j, k in tris:
                        assert cross2(verts[j] - verts[i], verts[k] - verts[i]) > 0


class TestExtrude:
    def unit_square_sketch(self):
        # grid 16..48 maps to a unit square in frame units
        return Sketch((Face((quad_loop(16, 16, 48, 48),)),))

    def test_prism_volume_matches_thickness(self):
        ext = Extrusion(
            ExtrudeOp.ADD, (48, 16, 31, 31, 31, *IDENTITY_ROTATION_PARAMS, 31, 31, 31)
        )
        solid = extrude(self.unit_square_sketch(), ext)
        dq = ext.dequantized()
        h = abs(dq["V"][0] - dq["V"][1])
        s = dq["S"][0]
        assert solid.mesh.volume() == pytest.approx(s * s * h, rel=1e-9)

    def test_scale_quadruples_volume(self):
        base = Extrusion(
            ExtrudeOp.ADD, (48, 16, 31, 31, 31, *IDENTITY_ROTATION_PARAMS, 31, 31, 31)
        )
        doubled = Extrusion(
            ExtrudeOp.ADD, (48, 16, 31, 31, 31, *IDENTITY_ROTATION_PARAMS, 63, 31, 31)
        )
        v1 = extrude(self.unit_square_sketch(), base).mesh.volume()
        v2 = extrude(self.unit_square_sketch(), doubled).mesh.volume()
        s1 = base.dequantized()["S"][0]
        s2 = doubled.dequantized()["S"][0]
        assert v2 / v1 == pytest.approx((s2 / s1) ** 2, rel=1e-9)

    def test_zero_thickness(self):
        ext = Extrusion(
            ExtrudeOp.ADD, (31, 31, 31, 31, 31, *IDENTITY_ROTATION_PARAMS, 31, 31, 31)
        )
        with pytest.raises(ZeroThicknessError):
            extrude(self.unit_square_sketch(), ext)

    def test_rotation_preserves_volume(self):
        # an arbitrary quantized rotation block re-orthonormalizes to an isometry
        ext_id = Extrusion(
            ExtrudeOp.ADD, (48, 16, 31, 31, 31, *IDENTITY_ROTATION_PARAMS, 31, 31, 31)
        )
        rot = (40, 50, 20, 10, 45, 60, 55, 22, 38)
        ext_rot = Extrusion(ExtrudeOp.ADD, (48, 16, 31, 31, 31, *rot, 31, 31, 31))
        v1 = extrude(self.unit_square_sketch(), ext_id).mesh.volume()
        v2 = extrude(self.unit_square_sketch(), ext_rot).mesh.volume()
        assert v2 == pytest.approx(v1, rel=1e-9)

    def test_watertight_every_prism(self, rng):
        for _ in range(60):
            m = random_renderable_model(rng, max_bodies=2, max_faces=2)
            for solid in build_solids(m):
                assert solid.mesh.is_watertight()
                assert solid.mesh.volume() > 0


def rect_body(x0, y0, x1, y1, v_top, v_bot, op="add"):
    loop = quad_loop(x0, y0, x1, y1)
    ext = Extrusion(
        ExtrudeOp(op), (v_top, v_bot, 31, 31, 31, *IDENTITY_ROTATION_PARAMS, 31, 31, 31)
    )
    return SketchExtrusion(Sketch((Face((loop,)),)), ext)


class TestRenderModel:
    def test_disjoint_add_occupancy_is_sum(self):
        m = CadModel((rect_body(4, 4, 24, 24, 48, 16), rect_body(40, 40, 60, 60, 48, 16)))
        grid = render_model(m)
        solids = build_solids(m)
        origin, edge = model_bounding_cube(solids)
        counts = [voxelize_solid(s, origin, edge, 64).sum() for s in solids]
        assert grid.occupied_count() == sum(counts)

    def test_cut_equals_set_difference(self):
        m = CadModel(
            (rect_body(8, 8, 56, 56, 56, 8), rect_body(24, 24, 40, 40, 48, 16, op="cut"))
        )
        grid = render_model(m)
        solids = build_solids(m)
        origin, edge = model_bounding_cube(solids)
        a = voxelize_solid(solids[0], origin, edge, 64)
        b = voxelize_solid(solids[1], origin, edge, 64)
        assert np.array_equal(grid.bits, a & ~b)

    def test_intersect_equals_set_intersection(self):
        m = CadModel(
            (
                rect_body(8, 8, 40, 40, 48, 16),
                rect_body(24, 24, 56, 56, 48, 16, op="intersect"),
            )
        )
        grid = render_model(m)
        solids = build_solids(m)
        origin, edge = model_bounding_cube(solids)
        a = voxelize_solid(solids[0], origin, edge, 64)
        b = voxelize_solid(solids[1], origin, edge, 64)
        assert np.array_equal(grid.bits, a & b)

    def test_single_body_identical_to_alone(self):
        b = rect_body(10, 10, 50, 50, 48, 16)
        grid = render_model(CadModel((b,)))
        solid = build_solids(CadModel((b,)))[0]
        origin, edge = model_bounding_cube([solid])
        assert np.array_equal(grid.bits, voxelize_solid(solid, origin, edge, 64))

    def test_cut_is_subset_and_commutative_adds(self):
        b1 = rect_body(8, 8, 40, 40, 48, 16)
        b2 = rect_body(24, 24, 56, 56, 48, 16)
        solids = build_solids(CadModel((b1, b2)))
        origin, edge = model_bounding_cube(solids)
        a = voxelize_solid(solids[0], origin, edge, 32)
        b = voxelize_solid(solids[1], origin, edge, 32)
        assert ((a & ~b) & ~a).sum() == 0
        assert np.array_equal(a | b, b | a)

    def test_empty_result_reported_not_raised(self):
        m = CadModel((rect_body(8, 8, 40, 40, 48, 16, op="cut"),))
        grid = render_model(m)
        assert grid.empty

    def test_body_error_carries_index(self):
        bad = rect_body(8, 8, 40, 40, 31, 31)  # zero thickness
        m = CadModel((rect_body(4, 4, 20, 20, 48, 16), bad))
        with pytest.raises(ZeroThicknessError) as exc:
            render_model(m)
        assert exc.value.body_index == 1

    def test_cube_volume_against_analytic(self):
        # square footprint of frame side 1, thickness 1: a unit cube
        m = CadModel((rect_body(16, 16, 48, 48, 48, 16),))
        grid = render_model(m)
        solid = build_solids(CadModel((m.bodies[0],)))[0]
        s = m.bodies[0].extrusion.dequantized()["S"][0]
        analytic = (1.0 * s) ** 2 * 1.0
        assert abs(grid.volume() - analytic) / analytic < 0.02
        assert solid.mesh.volume() == pytest.approx(analytic, rel=1e-9)

    def test_translation_equivariance_integer_voxels(self):
        b = rect_body(20, 20, 44, 44, 48, 16)
        solid = build_solids(CadModel((b,)))[0]
        origin = np.array([-2.0, -2.0, -2.0])
        edge = 4.0
        r = 64
        w = edge / r
        base = voxelize_solid(solid, origin, edge, r)
        shifted = voxelize_solid(solid, origin - np.array([5 * w, 0, 0]), edge, r)
        assert np.array_equal(np.roll(base, 5, axis=0)[5:], shifted[5:])


class TestSamplePointCloud:
    def grid(self):
        return render_model(CadModel((rect_body(16, 16, 48, 48, 48, 16),)))

    def test_count_and_determinism(self):
        g = self.grid()
        a = sample_point_cloud(g, 2000, seed=7)
        b = sample_point_cloud(g, 2000, seed=7)
        c = sample_point_cloud(g, 2000, seed=8)
        assert a.shape == (2000, 3)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_unit_cube_normalization(self):
        pts = sample_point_cloud(self.grid(), 500, seed=1)
        extent = pts.max(axis=0) - pts.min(axis=0)
        assert extent.max() == pytest.approx(1.0)
        center = (pts.max(axis=0) + pts.min(axis=0)) / 2
        assert np.allclose(center, 0.0, atol=1e-9)

    def test_points_near_cube_surface(self):
        model = CadModel((rect_body(16, 16, 48, 48, 48, 16),))
        g = render_model(model)
        # the mesh AABB gives the analytic cube faces independently of the
        # voxel classification being tested
        lo_w, hi_w = build_solids(model)[0].mesh.aabb()
        pts_world = sample_point_cloud(g, 1000, seed=3, normalize=False)
        dist_to_face = np.minimum(pts_world - lo_w, hi_w - pts_world)
        nearest = dist_to_face.min(axis=1)
        # a jittered point in a boundary voxel sits within 1.5 widths of
        # the true face, possibly half a width outside the box
        assert np.abs(nearest).max() <= 1.5 * g.voxel_width + 1e-9

    def test_empty_grid(self):
        g = VoxelGrid(8, np.zeros(3), 1.0)
        with pytest.raises(EmptySolidError):
            sample_point_cloud(g, 10, seed=0)


class TestExports(object):
    def test_obj_stl_vox_xyz(self, tmp_path, rng):
        from cadtext.geometry.export import (
            read_voxels,
            read_xyz,
            write_obj,
            write_stl,
            write_voxels,
            write_xyz,
        )

        m = random_renderable_model(rng)
        solids = build_solids(m)
        mesh = TriangleMesh.concatenate([s.mesh for s in solids])
        write_obj(mesh, tmp_path / "m.obj")
        lines = (tmp_path / "m.obj").read_text().splitlines()
        assert sum(1 for l in lines if l.startswith("v ")) == len(mesh.vertices)
        assert sum(1 for l in lines if l.startswith("f ")) == len(mesh.faces)

        write_stl(mesh, tmp_path / "m.stl")
        data = (tmp_path / "m.stl").read_bytes()
        assert len(data) == 84 + 50 * len(mesh.faces)

        grid = render_model(m)
        write_voxels(grid, tmp_path / "m.vox")
        grid2 = read_voxels(tmp_path / "m.vox")
        assert np.array_equal(grid.bits, grid2.bits)
        assert grid2.resolution == grid.resolution

        pts = sample_point_cloud(grid, 100, seed=0)
        write_xyz(pts, tmp_path / "m.xyz")
        pts2 = read_xyz(tmp_path / "m.xyz")
        assert np.allclose(pts, pts2, atol=1e-6)

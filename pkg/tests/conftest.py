"""Shared builders and hypothesis strategies."""

import hypothesis.strategies as st
import numpy as np
import pytest

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
from cadtext.synth import IDENTITY_ROTATION_PARAMS, circle_loop


def line(x, y):
    return Curve(CurveKind.LINE, (GridCoord(x, y),))


def arc(x0, y0, x1, y1):
    return Curve(CurveKind.ARC, (GridCoord(x0, y0), GridCoord(x1, y1)))


def quad_loop(x0, y0, x1, y1):
    return Loop((line(x0, y0), line(x1, y0), line(x1, y1), line(x0, y1)))


def simple_extrusion(op="add", v_top=48, v_bot=16, scale=31):
    params = (v_top, v_bot, 31, 31, 31, *IDENTITY_ROTATION_PARAMS, scale, 31, 31)
    return Extrusion(ExtrudeOp(op), params)


def body(faces, op="add", v_top=48, v_bot=16):
    return SketchExtrusion(Sketch(tuple(faces)), simple_extrusion(op, v_top, v_bot))


def quad_body(x0=16, y0=16, x1=48, y1=48, op="add", v_top=48, v_bot=16):
    return body([Face((quad_loop(x0, y0, x1, y1),))], op, v_top, v_bot)


def single_circle_model():
    # the worked example: one circle loop, add extrusion with all params 31
    loop = Loop(
        (
            Curve(
                CurveKind.CIRCLE,
                (GridCoord(31, 15), GridCoord(47, 31), GridCoord(31, 47), GridCoord(15, 31)),
            ),
        )
    )
    ext = Extrusion(ExtrudeOp.ADD, (31,) * 17)
    return CadModel((SketchExtrusion(Sketch((Face((loop,)),)), ext),))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


coords = st.integers(min_value=0, max_value=63)
grid_points = st.builds(GridCoord, coords, coords)

lines_st = st.builds(lambda p: Curve(CurveKind.LINE, (p,)), grid_points)
arcs_st = st.builds(lambda a, b: Curve(CurveKind.ARC, (a, b)), grid_points, grid_points)
circles_st = st.builds(
    lambda a, b, c, d: Curve(CurveKind.CIRCLE, (a, b, c, d)),
    grid_points,
    grid_points,
    grid_points,
    grid_points,
)

multi_curve_loops = st.lists(st.one_of(lines_st, arcs_st), min_size=1, max_size=4).map(
    lambda cs: Loop(tuple(cs))
)
circle_loops = circles_st.map(lambda c: Loop((c,)))
loops_st = st.one_of(circle_loops, multi_curve_loops)

faces_st = st.lists(loops_st, min_size=1, max_size=3).map(lambda ls: Face(tuple(ls)))
sketches_st = st.lists(faces_st, min_size=1, max_size=3).map(lambda fs: Sketch(tuple(fs)))
extrusions_st = st.builds(
    lambda op, params: Extrusion(op, tuple(params)),
    st.sampled_from(list(ExtrudeOp)),
    st.lists(coords, min_size=17, max_size=17),
)
bodies_st = st.builds(SketchExtrusion, sketches_st, extrusions_st)
models_st = st.lists(bodies_st, min_size=1, max_size=3).map(lambda bs: CadModel(tuple(bs)))

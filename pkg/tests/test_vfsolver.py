from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from gmlie.exact import FunctionField
from gmlie.geometry import get_geometry
from gmlie.vfsolver import (NotInSpan, VectorField, bracket, classify, constant_span, jacobi_defects, solve_lie,
                            solve_modular)


def _field(space, comps):
    return VectorField(space.ctx, {v: space.ctx.parse(t) for v, t in comps.items()})


def test_elliptic_modular_field(elliptic_space):
    R = elliptic_space.modular_field("R").field
    want = _field(elliptic_space, {"z": "(1 - 432*z)*z*s22^2", "s22": "-s21*s22^2",
                                   "s21": "-60*z*(1 - 432*z)*s22^3"})
    assert R == want


def test_p2_modular_field_and_yukawa_slot(p2_space):
    m = p2_space.modular_field("R")
    ys = {"Y111": p2_space.ctx.parse("-1/(3*(1 - 27*z))")}
    want = VectorField(p2_space.ctx, {"z": p2_space.ctx.parse("z*s33^2/Y111", ys),
                                      "s33": p2_space.ctx.parse("-s32*s33^2"),
                                      "s32": p2_space.ctx.parse("18*z*s33^3/Y111", ys)})
    assert m.field == want
    assert list(m.yukawa) == ["Y[1][2]"]


def test_p2_gauge_direction_field(p2_space):
    lie = dict(p2_space.lie_fields())
    assert lie["Rg32"] == _field(p2_space, {"s32": "1/s33"})
    assert lie["Rg33"] == _field(p2_space, {"s33": "s33", "s32": "s32"})


def test_solve_lie_matches_space(elliptic_space):
    g = [[0, 0], [1, 0]]
    assert str(solve_lie(get_geometry("elliptic-1star"), g)) == str(dict(elliptic_space.lie_fields())["Rg21"])


def test_solve_modular_helper():
    assert solve_modular(get_geometry("elliptic-1star")).name == "R"


def test_elliptic_is_sl2(elliptic_space):
    rep = classify(elliptic_space.all_fields())
    assert rep.kind == "sl2" and rep.closed and rep.derived_dimension == 3


def test_f2_semidirect(f2_space):
    rep = classify(f2_space.all_fields())
    assert rep.kind == "sl2 semidirect Bianchi V"
    assert set(rep.ideal) == {"R2", "Rg22", "Rg23"}


@pytest.mark.parametrize("name", ["elliptic_space", "p2_space", "f2_space"])
def test_jacobi_on_solved_fields(name, request):
    assert jacobi_defects(request.getfixturevalue(name).all_fields()) == []


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=6, max_size=6), st.lists(st.integers(-3, 3), min_size=6, max_size=6))
def test_bracket_antisymmetric_bilinear(f2_space, a, b):
    fields = [f for _, f in f2_space.all_fields()]
    X = fields[0].scale(0)
    Y = fields[0].scale(0)
    for c, f in zip(a, fields):
        X = X + f.scale(c)
    for c, f in zip(b, fields):
        Y = Y + f.scale(c)
    assert (bracket(X, Y) + bracket(Y, X)).is_zero()
    coeffs = constant_span(bracket(X, Y), fields)
    assert all(isinstance(c, Fraction) for c in coeffs)


def test_constant_span_rejects_non_constant(elliptic_space):
    fields = [f for _, f in elliptic_space.all_fields()]
    z = elliptic_space.ctx.gen("z")
    with pytest.raises(NotInSpan):
        constant_span(fields[0].scale(z), fields)


def test_vector_field_apply():
    ctx = FunctionField(["x", "y"])
    X = VectorField(ctx, {"x": ctx.gen("y"), "y": -ctx.gen("x")})
    assert X.apply(ctx.parse("x^2 + y^2")).is_zero()

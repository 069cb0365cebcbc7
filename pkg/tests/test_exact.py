from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from gmlie.exact import (FieldConstant, FunctionField, MixedExtensions, NonUnique, NoSolution, ParseError,
                         RootNotInField, ZeroDenominator, check_solution, mat_inv, mat_mul, identity,
                         quad_arith, solve_linear)

rationals = st.fractions(max_denominator=50).filter(lambda x: abs(x) < 1000)


def consts(d):
    return st.builds(lambda a, b: FieldConstant(a, b, d), rationals, rationals)


@settings(max_examples=1000, deadline=None)
@given(st.sampled_from([2, -3, 5]).flatmap(lambda d: st.tuples(consts(d), consts(d), consts(d))))
def test_field_axioms(abc):
    a, b, c = abc
    assert a + b == b + a and a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + (-a) == FieldConstant(0)
    if a:
        assert a * a.inverse() == FieldConstant(1)
        assert (b / a) * a == b


def test_sqrt_defining_relations():
    assert FieldConstant(0, 2, 2) ** 2 == FieldConstant(8)
    assert FieldConstant(1, 1, 2) * FieldConstant(1, -1, 2) == FieldConstant(-1)
    assert quad_arith(FieldConstant.sqrt(-3), FieldConstant.sqrt(-3), "*") == FieldConstant(-3)


def test_mixed_extensions_rejected():
    with pytest.raises(MixedExtensions):
        FieldConstant.sqrt(2) + FieldConstant.sqrt(-3)


def test_nth_root():
    assert FieldConstant(Fraction(27, 8)).nth_root(3) == FieldConstant(Fraction(3, 2))
    assert FieldConstant(8).nth_root(2, 2) == FieldConstant(0, 2, 2)
    with pytest.raises(RootNotInField):
        FieldConstant(432).nth_root(6)


def test_normalization_canonical():
    ctx = FunctionField(["z", "s"])
    f = ctx.parse("(2*z - 2)/(4*z^2 - 4)")
    g = ctx.parse("1/(2*z + 2)")
    assert f == g and f.canonical() == g.canonical()
    assert f.denominator.leading_coefficient() == FieldConstant(1)


def test_zero_denominator():
    ctx = FunctionField(["z"])
    with pytest.raises(ZeroDenominator):
        ctx.gen("z") / ctx.zero()


def test_parse_rejects_unknown_names():
    ctx = FunctionField(["z"])
    with pytest.raises(ParseError):
        ctx.parse("__import__('os')")
    with pytest.raises(ParseError):
        ctx.parse("w + 1")


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=3, max_size=3), st.lists(st.integers(-5, 5), min_size=3, max_size=3))
def test_leibniz_on_rational_functions(p, q):
    ctx = FunctionField(["z", "s"])
    z, s = ctx.gen("z"), ctx.gen("s")
    f = p[0] + p[1] * z + p[2] * z * s
    g = 1 + q[0] * s + q[1] * z ** 2 + q[2] * z * s ** 2
    for v in ("z", "s"):
        assert (f * g).diff(v) == f.diff(v) * g + f * g.diff(v)
        if not g.is_zero():
            assert (f / g).diff(v) == (f.diff(v) * g - f * g.diff(v)) / g ** 2


def test_diff_over_quadratic_field():
    ctx = FunctionField(["z"], -3)
    z = ctx.gen("z")
    f = ctx.const(FieldConstant.sqrt(-3)) * z ** 2 / (1 - z)
    assert f.diff("z") * (1 - z) ** 2 == ctx.const(FieldConstant.sqrt(-3)) * (2 * z - z ** 2)


def test_solve_linear_unique_and_errors():
    ctx = FunctionField(["z"])
    z = ctx.gen("z")
    M = [[z, ctx.one()], [ctx.one(), -z]]
    b = [ctx.one(), z]
    x = solve_linear(M, b)
    assert check_solution(M, x, b)
    with pytest.raises(NoSolution):
        solve_linear([[z], [2 * z]], [ctx.one(), ctx.zero()])
    with pytest.raises(NonUnique) as info:
        solve_linear([[z, z]], [z])
    assert len(info.value.kernel) == 1


def test_matrix_inverse():
    ctx = FunctionField(["a", "b"])
    a, b = ctx.gen("a"), ctx.gen("b")
    S = [[1 / a, ctx.zero()], [b, a]]
    assert mat_mul(S, mat_inv(S)) == identity(2, ctx)

import pytest

from gmlie.exact import FunctionField
from gmlie.gaussmanin import (OperatorWord, annihilates, connection_matrix, flatness_defects, is_flat, parse_operator,
                              reduce)
from gmlie.geometry import get_geometry


def test_operator_commutation():
    ctx = FunctionField(["z"])
    th = OperatorWord.theta(ctx, 0)
    z = OperatorWord.scalar(ctx, ctx.gen("z"))
    # theta z = z theta + z
    assert th * z == z * th + z


def test_operator_apply_matches_parse():
    ctx = FunctionField(["z"])
    L = parse_operator("theta^2 - z*(theta + 1)", ctx)
    f = ctx.parse("z^3")
    assert L.apply(f) == ctx.parse("9*z^3 - 4*z^4")


def test_elliptic_connection():
    geo = get_geometry("elliptic-1star")
    A = connection_matrix(geo).theta_matrices["z"]
    ctx = geo.ctx
    assert A == [[ctx.zero(), ctx.parse("1/(1 - 432*z)")], [ctx.parse("60*z"), ctx.zero()]]


def test_p2_connection_entries():
    geo = get_geometry("local-p2")
    [A] = reduce(geo)
    ctx = geo.ctx
    assert A[0] == [ctx.zero(), ctx.one(), ctx.zero()]
    assert A[1][2] == ctx.parse("-1/(3*(1 - 27*z))")
    assert A[2][1] == ctx.parse("-18*z")


@pytest.mark.parametrize("name", ["elliptic-1star", "local-p2", "local-f2"])
def test_operators_annihilate(name):
    geo = get_geometry(name)
    assert annihilates(geo, connection_matrix(geo))


def test_f2_connection_flat():
    conn = connection_matrix(get_geometry("local-f2"))
    assert is_flat(conn)
    assert set(flatness_defects(conn)) == {("z1", "z2")}

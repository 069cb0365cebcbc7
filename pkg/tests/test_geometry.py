from fractions import Fraction

import pytest

from gmlie.geometry import (FiltrationShape, RankMismatch, SchemaError, check_pairing, gauge_shape, get_geometry,
                            lie_generators, list_geometries, load_geometry)
from gmlie.vfsolver import EnhancedSpace

ELLIPTIC_TOML = """
name = "elliptic-copy"
variables = ["z"]
pf = ["theta^2 - 12*z*(6*theta + 5)*(6*theta + 1)"]
basis = [["Omega"], ["1 - 432*z", "theta"]]
hodge_ranks = [1, 1]
weight_ranks = { 1 = 2 }
pairing_blocks = { 1 = [[0, -1], [1, 0]] }
vf_shapes = { R = [["0", "1"], ["0", "0"]] }
"""


def _entries(S):
    return [[str(x) for x in row] for row in S.entries]


def test_builtins_listed():
    assert list_geometries() == ["elliptic-1star", "local-p2", "local-f2"]


def test_elliptic_gauge():
    S = get_geometry("elliptic-1star").gauge()
    assert _entries(S) == [["1/s22", "0"], ["s21", "s22"]]
    assert S.parameters == ["s21", "s22"]


def test_p2_gauge_fixes_top_entry():
    S = get_geometry("local-p2").gauge()
    assert _entries(S) == [["1", "0", "0"], ["0", "1/s33", "0"], ["0", "s32", "s33"]]


def test_f2_gauge_parameters():
    S = get_geometry("local-f2").gauge()
    assert sorted(S.parameters) == ["s22", "s23", "s43", "s44"]
    assert str(S.entries[2][2]) == "1/s44"


@pytest.mark.parametrize("name", ["elliptic-1star", "local-p2", "local-f2"])
def test_pairing_preserved(name):
    geo = get_geometry(name)
    assert check_pairing(geo.gauge(), geo.shape)


def test_lie_generators_are_constant_derivatives():
    S = get_geometry("elliptic-1star").gauge()
    gens = dict(lie_generators(S))
    assert gens["s22"] == [[Fraction(-1), Fraction(0)], [Fraction(0), Fraction(1)]]
    assert gens["s21"] == [[Fraction(0), Fraction(0)], [Fraction(1), Fraction(0)]]


def test_unnormalized_top_entry_is_free():
    geo = get_geometry("local-p2")
    assert "s11" in gauge_shape(geo.shape, normalize_top=False).parameters


def test_toml_round_trip_matches_builtin():
    geo = load_geometry(ELLIPTIC_TOML)
    assert geo.name == "elliptic-copy"
    a = EnhancedSpace(geo).modular_field("R").field
    b = EnhancedSpace(get_geometry("elliptic-1star")).modular_field("R").field
    assert str(a) == str(b)


def test_schema_error_names_missing_pairing():
    text = ELLIPTIC_TOML.replace("pairing_blocks = { 1 = [[0, -1], [1, 0]] }\n", "pairing_blocks = {}\n")
    with pytest.raises(SchemaError) as info:
        load_geometry(text)
    assert info.value.path == ".pairing_blocks"


def test_schema_error_names_missing_field():
    with pytest.raises(SchemaError) as info:
        load_geometry(ELLIPTIC_TOML.replace('pf = ["theta^2 - 12*z*(6*theta + 5)*(6*theta + 1)"]\n', ""))
    assert info.value.path.endswith("pf")


def test_rank_mismatch_in_config():
    with pytest.raises(RankMismatch):
        load_geometry(ELLIPTIC_TOML.replace("hodge_ranks = [1, 1]", "hodge_ranks = [1, 2]"))


def test_rank_mismatch_in_shape():
    with pytest.raises(RankMismatch):
        FiltrationShape(3, (1, 1), ((1, 2),), ())


def test_bad_toml():
    with pytest.raises(SchemaError):
        load_geometry("this is = = not toml")

import pytest

from gmlie.geometry import get_geometry
from gmlie.mhspoly import (DegenerateParameters, NotReflexive, Polytope2D, matches_preset, quotient_ranks,
                           random_parameters, shape_from_ranks, stable_ranks)

P2 = [[1, 0], [0, 1], [-1, -1]]
F2 = [[1, 0], [0, 1], [-1, 0], [-2, -1]]


def test_lattice_points_of_p2_triangle():
    poly = Polytope2D(P2)
    assert sorted(poly.points(1)) == [(-1, -1), (0, 0), (0, 1), (1, 0)]
    assert len(poly.points(2)) == 10
    assert poly.points(0) == [(0, 0)]


def test_face_codimension():
    poly = Polytope2D(P2)
    assert poly.face_codim(1, (0, 0)) == 0
    assert poly.face_codim(2, (1, 1)) == 1
    assert poly.face_codim(1, (1, 0)) == 2


def test_not_reflexive():
    with pytest.raises(NotReflexive):
        Polytope2D([[2, 0], [0, 2], [-2, -2]])


def test_degenerate_parameters():
    poly = Polytope2D(P2)
    a = random_parameters(poly, 0)
    a[(0, 0)] = 0
    with pytest.raises(DegenerateParameters):
        quotient_ranks(poly, a)


def test_p2_ranks():
    r = stable_ranks(Polytope2D(P2))
    assert r.total == 3 and r.weight[3] == 2
    assert (r.hodge[3], r.hodge[2]) == (1, 2)
    assert r.representatives == ["1", "t0", "t0^2"]
    assert matches_preset(r, get_geometry("local-p2").shape)


def test_f2_ranks():
    r = stable_ranks(Polytope2D(F2))
    assert r.total == 4 and (r.weight[3], r.weight[5]) == (2, 3)
    assert (r.hodge[3], r.hodge[2]) == (1, 3)
    assert matches_preset(r, get_geometry("local-f2").shape)


def test_shape_from_ranks_is_valid():
    r = quotient_ranks(Polytope2D(P2))
    shape = shape_from_ranks(r)
    assert shape.b_n == 3 and shape.hodge_ranks == (1, 1, 1)


import pytest

from gmlie.exact import FieldConstant
from gmlie.frobenius import NotMUM, apply_operator, bridge_checks, local_basis, mirror_map
from gmlie.gaussmanin import parse_operator
from gmlie.geometry import get_geometry
from gmlie.qseries import hauptmodul


def _curve(name):
    geo = get_geometry(name)
    return parse_operator(geo.curve_pf, geo.ctx)


@pytest.mark.parametrize("name", ["elliptic-1star", "local-p2"])
def test_basis_is_annihilated(name):
    L = _curve(name)
    for w in local_basis(L, 12):
        r = apply_operator(L, w)
        assert all(p.truncate(11).is_zero() for p in r.parts)


def test_elliptic_holomorphic_period():
    w0 = local_basis(_curve("elliptic-1star"), 4)[0].parts[0]
    assert [w0.coefficient(n) for n in range(3)] == [FieldConstant(1), FieldConstant(60), FieldConstant(13860)]


def test_mirror_map_round_trip_and_hauptmodul():
    m = mirror_map(_curve("local-p2"), 12)
    assert m.round_trip_ok()
    assert (m.z_of_q * 27).agrees_with(hauptmodul("3", 12), 12)


def test_not_mum():
    geo = get_geometry("elliptic-1star")
    with pytest.raises(NotMUM):
        local_basis(parse_operator("(theta - 1)*theta - z", geo.ctx), 5)


@pytest.mark.parametrize("name", ["elliptic-1star", "local-p2"])
def test_bridge_identities(name):
    results = bridge_checks(get_geometry(name), 20)
    assert results and all(c.ok for c in results), [(c.check_id, c.witness) for c in results if not c.ok]

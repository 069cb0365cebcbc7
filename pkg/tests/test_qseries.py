from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from gmlie.exact import FieldConstant
from gmlie.qseries import (EtaQuotientSpec, NotInvertible, TruncatedSeries, compose, eisenstein, eta, eta_quotient,
                           exp_series, form_ABC, format_series, hauptmodul, log_series, nth_root, revert, theta_q)

small = st.integers(-20, 20)


def _sigma(k, n):
    return sum(d ** k for d in range(1, n + 1) if n % d == 0)


def test_eisenstein_against_divisor_sums():
    for k, c in ((2, -24), (4, 240), (6, -504)):
        E = eisenstein(k, 15)
        assert E.coefficient(0) == FieldConstant(1)
        for n in range(1, 15):
            assert E.coefficient(n) == FieldConstant(c * _sigma(k - 1, n))


def test_eta_24th_power_is_delta():
    d = eta(1, 24, 4)
    assert [d.coefficient(n) for n in (1, 2, 3)] == [FieldConstant(1), FieldConstant(-24), FieldConstant(252)]
    assert d.valuation() == 1


def test_delta_from_e4_e6():
    E4, E6 = eisenstein(4, 12), eisenstein(6, 12)
    assert ((E4 ** 3 - E6 ** 2) * Fraction(1, 1728)).agrees_with(eta(1, 24, 12), 12)


def test_eta_quotient_fractional_exponent():
    s = eta_quotient(EtaQuotientSpec(((1, 1),)), 3)
    assert s.valuation() == Fraction(1, 24)


def test_hauptmodul_level_three_leading_terms():
    h = hauptmodul("3", 4)
    assert [h.coefficient(n) for n in (0, 1, 2)] == [FieldConstant(0), FieldConstant(27), FieldConstant(-405)]


def test_level_two_lives_in_quadratic_field():
    f = form_ABC("2", 6)
    assert f.C.coefficient(Fraction(1, 4)) == FieldConstant(0, 2, 2)
    assert (f.C ** 4).coefficient(1) == FieldConstant(64)


@settings(max_examples=60, deadline=None)
@given(st.lists(small, min_size=1, max_size=8), st.integers(2, 6))
def test_root_round_trip(tail, n):
    f = TruncatedSeries.from_list([1] + tail, 10)
    r = nth_root(f, n)
    assert (r ** n).agrees_with(f, 10)


@settings(max_examples=60, deadline=None)
@given(st.lists(small, min_size=1, max_size=8))
def test_inverse_round_trip(tail):
    f = TruncatedSeries.from_list([1] + tail, 10)
    assert (f * f.inverse()).agrees_with(TruncatedSeries.constant(1, 10), 10)


@settings(max_examples=40, deadline=None)
@given(st.lists(small, min_size=1, max_size=6))
def test_reversion_round_trip(tail):
    f = TruncatedSeries({1: 1, **{i + 2: c for i, c in enumerate(tail)}}, 9)
    g = revert(f)
    assert compose(f, g).agrees_with(TruncatedSeries.monomial(1, 1, 9), 9)


@settings(max_examples=40, deadline=None)
@given(st.lists(small, min_size=1, max_size=6))
def test_exp_log_round_trip(tail):
    h = TruncatedSeries({i + 1: c for i, c in enumerate(tail)}, 9)
    assert log_series(exp_series(h)).agrees_with(h, 9)


def test_inverse_of_positive_valuation_is_laurent():
    inv = TruncatedSeries.from_list([0, 1, 1], 5).inverse()
    assert inv.valuation() == -1


def test_zero_not_invertible():
    with pytest.raises(NotInvertible):
        TruncatedSeries({}, 5).inverse()


def test_theta_q_and_format():
    s = TruncatedSeries.from_list([1, 2, 3], 3)
    assert format_series(theta_q(s)) == "2*q + 6*q^2 + O(q^3)"


def test_first_difference_reports_exponent():
    a = TruncatedSeries.from_list([1, 2, 3], 3)
    b = TruncatedSeries.from_list([1, 2, 4], 3)
    e, x, y = a.first_difference(b)
    assert e == 2 and x == FieldConstant(3) and y == FieldConstant(4)

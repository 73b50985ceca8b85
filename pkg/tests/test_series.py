from fractions import Fraction as F

import pytest
from hypothesis import given, settings

from jacobiq.errors import DirectionError, GridError, NotInvertible, WindowError
from jacobiq.series import (
    Direction,
    coefficient,
    deriv_q,
    deriv_y,
    equal_to_order,
    first_difference,
    from_dict,
    from_json,
    invert_unit,
    make_series,
    monomial,
    mul,
    one,
    power,
    qseries,
    substitute_q_power,
    substitute_y_power,
    to_dict,
    to_json,
    truncate,
    zero,
)

from _props import derivations_commute, invert_roundtrip, leibniz, ring_laws, series_st

THETA_LEAD = [(F(1, 8), F(1, 2), 1), (F(1, 8), F(-1, 2), -1)]


def test_empty_series_has_q_min_at_q_max():
    z = make_series([], q_max=10)
    assert z.is_zero
    assert z.q_min == 10


def test_unit_series():
    u = make_series([(0, 0, 1)])
    assert u == one()
    assert u.terms() == [(0, 0, 1)]


def test_theta_leading_slice_grid():
    t = make_series(THETA_LEAD)
    assert t.q_den == 8 and t.y_den == 2
    assert t.q_min == F(1, 8)


def test_off_grid_and_out_of_window():
    with pytest.raises(GridError):
        make_series([(F(1, 3), 0, 1)], q_den=2)
    with pytest.raises(WindowError):
        make_series([(0, 5, 1)], y_window=(-2, 2))
    with pytest.raises(WindowError):
        make_series([(3, 0, 1)], q_max=3)


def test_add_identities():
    a = make_series([(0, 0, 1), (1, 2, 3)], 5, (-3, 3))
    assert equal_to_order(a + zero(), a)
    s = make_series([(0, 0, 1), (1, 0, 1)]) + make_series([(0, 0, 1), (1, 0, -1)])
    assert s.terms() == [(0, 0, 2)]
    t = make_series(THETA_LEAD)
    assert (t + (-t)).is_zero


def test_add_takes_min_q_max_and_window_intersection():
    a = make_series([(0, 0, 1)], 5, (-3, 3), closed=(False, False))
    b = make_series([(0, 1, 1)], 3, (-1, 4), closed=(False, False))
    s = a + b
    assert s.q_max == 3
    assert s.y_window == (-1, 3)


def test_mixed_open_directions_rejected():
    a = make_series([(0, 0, 1)], 4, (-3, 3), Direction.NEG_Y, closed=(False, True))
    b = make_series([(0, 0, 1)], 4, (-3, 3), Direction.POS_Y, closed=(True, False))
    with pytest.raises(DirectionError):
        a + b
    with pytest.raises(DirectionError):
        mul(a, b)


def test_geometric_telescopes():
    geo = qseries([1] * 10, q_max=10)
    prod, rep = mul(make_series([(0, 0, 1), (1, 0, -1)]), geo)
    assert prod.q_max == 10
    assert first_difference(prod, one()) is None


def test_mul_window_report_q_max():
    a = make_series([(1, 0, 1)], 5)
    b = make_series([(2, 0, 1)], 4)
    p, rep = mul(a, b)
    # min(a.q_max + b.q_min, b.q_max + a.q_min)
    assert p.q_max == min(5 + 2, 4 + 1)


def test_binomial_square():
    d = make_series([(0, F(1, 2), 1), (0, F(-1, 2), -1)])
    sq = power(d, 2)
    assert sq.terms() == [(0, -1, 1), (0, 0, -2), (0, 1, 1)]
    assert mul(one(), d)[0] == d


def test_invert_geometric():
    inv = invert_unit(make_series([(0, 0, 1), (1, 0, -1)]), q_max=8)
    assert [c for _, _, c in inv.terms()] == [1] * 8


def test_invert_theta_difference_neg_y():
    d = make_series([(0, F(1, 2), 1), (0, F(-1, 2), -1)])
    inv = invert_unit(d, Direction.NEG_Y, y_limit=-10, q_max=1)
    assert coefficient(inv, 0, F(-1, 2)) == 1
    assert coefficient(inv, 0, F(-7, 2)) == 1
    assert first_difference(mul(d, inv)[0], one()) is None


def test_invert_monomial():
    inv = invert_unit(monomial(F(1, 24), 0, 1, q_max=F(25, 24)))
    assert inv.terms() == [(F(-1, 24), 0, 1)]


def test_invert_zero_and_bare_slice():
    with pytest.raises(NotInvertible):
        invert_unit(zero(4))
    open_top = make_series([(0, 0, 1)], 2, (-2, 2), closed=(True, False))
    with pytest.raises(NotInvertible):
        invert_unit(open_top, Direction.NEG_Y)


def test_derivatives():
    assert deriv_q(monomial(F(-1, 24), 0)).terms() == [(F(-1, 24), 0, F(-1, 24))]
    assert deriv_y(make_series([(0, 1, 1), (0, -1, 1)])).terms() == [(0, -1, -1), (0, 1, 1)]


def test_substitutions():
    t = make_series(THETA_LEAD, q_max=1)
    s3 = substitute_q_power(t, 3)
    assert s3.terms() == [(F(3, 8), F(-1, 2), -1), (F(3, 8), F(1, 2), 1)]
    assert s3.q_max == 3
    assert substitute_y_power(t, 1) == t
    f = substitute_y_power(monomial(0, 1, direction=Direction.NEG_Y), -1)
    assert f.terms() == [(0, -1, 1)]
    assert f.direction is Direction.POS_Y


def test_coefficient_and_unknown():
    e = make_series([(0, 0, 1), (1, 0, -24)], 3)
    assert coefficient(e, 1, 0) == -24
    assert coefficient(e, 2, 0) == 0
    assert coefficient(zero(), 5, 0) == 0
    with pytest.raises(WindowError):
        coefficient(e, 3, 0)
    cut = make_series([(0, 0, 1)], 2, (-1, 1), closed=(False, False))
    with pytest.raises(WindowError):
        coefficient(cut, 0, 4)


def test_equal_to_order_reflexive():
    a = make_series(THETA_LEAD, 2)
    assert equal_to_order(a, a)
    assert equal_to_order(a, a, 2, (-50, 50))
    # past the guaranteed q_max the comparison is unknown, not true
    with pytest.raises(WindowError):
        equal_to_order(a, a, 100, (-50, 50))


def test_truncate():
    a = qseries([1, 2, 3, 4], 4)
    assert truncate(a, q_max=2).terms() == [(0, 0, 1), (1, 0, 2)]


def test_json_roundtrip_and_canonical_order():
    a = make_series([(1, -1, F(2, 3)), (0, 1, 1), (1, -2, -1)], 3, (-2, 2), closed=(False, True))
    d = to_dict(a)
    assert [(t["q"], t["y"]) for t in d["terms"]] == [("0", "1"), ("1", "-2"), ("1", "-1")]
    assert d["q_max"] == "3" and d["direction"] == "neg_y"
    b = from_json(to_json(a))
    assert b == a
    bare = {k: d[k] for k in ("q_den", "y_den", "q_max", "y_window", "direction", "terms")}
    c = from_dict(bare)
    assert c.raw_terms() == a.raw_terms()
    assert not c.closed_lo and not c.closed_hi


def test_substitute_keeps_coefficients():
    a = make_series([(F(1, 2), 1, 3), (2, -1, 5)], 3)
    s = substitute_q_power(a, 4)
    assert coefficient(s, 2, 1) == 3 and coefficient(s, 8, -1) == 5


@settings(max_examples=100, deadline=None)
@given(series_st(), series_st(), series_st())
def test_ring_laws_property(a, b, c):
    assert ring_laws(a, b, c)


@settings(max_examples=100, deadline=None)
@given(series_st(), series_st())
def test_leibniz_property(a, b):
    assert leibniz(a, b)


@settings(max_examples=100, deadline=None)
@given(series_st(unit=True))
def test_invert_roundtrip_property(u):
    assert invert_roundtrip(u)


@settings(max_examples=100, deadline=None)
@given(series_st())
def test_derivations_commute_property(a):
    assert derivations_commute(a)

from fractions import Fraction as F
from math import factorial

import pytest

from jacobiq.errors import ParameterError
from jacobiq.series import Direction, coefficient, deriv_y, equal_to_order, first_difference, power, substitute_y_power
from jacobiq.special import (
    TAGS,
    FunctionName,
    bernoulli,
    eisenstein_E,
    eisenstein_G,
    eta,
    eta_cubed_by_squaring,
    eta_pow,
    p_minus,
    p_plus,
    pentagonal,
    q_k,
    theta11,
    theta_derivative_series,
    theta_i0,
    theta_j_adm,
    twisted_E,
    twisted_E1,
    weierstrass_wp,
)


def slice_(s, q):
    return {y: c for qq, y, c in s.terms() if qq == q}


def test_bernoulli_values():
    assert bernoulli(2) == F(1, 6) and bernoulli(4) == F(-1, 30) and bernoulli(6) == F(1, 42)
    assert bernoulli(1) == F(-1, 2)


@pytest.mark.parametrize("k, const", [(2, F(-1, 12)), (4, F(1, 720)), (6, F(-1, 30240))])
def test_eisenstein_G_constants(k, const):
    g = eisenstein_G(k, 3)
    assert coefficient(g, 0, 0) == const == -bernoulli(k) / factorial(k)
    assert g.tag.two_pi_i_pow == k


def test_eisenstein_G_first_coefficient():
    assert coefficient(eisenstein_G(2, 3), 1, 0) == 2


def test_eisenstein_E():
    assert [c for _, _, c in eisenstein_E(2, 3).terms()] == [1, -24, -72, -96]
    assert coefficient(eisenstein_E(4, 2), 1, 0) == 240
    for k in (2, 4, 6, 8):
        assert coefficient(eisenstein_E(k, 2), 0, 0) == 1


@pytest.mark.parametrize("k", [0, 3, -2])
def test_eisenstein_bad_weight(k):
    with pytest.raises(ParameterError):
        eisenstein_G(k)


def test_p_plus_minus_q0_slices():
    assert slice_(p_plus(1, 2, (-4, 4)), 0) == {1: 1, 2: 1, 3: 1, 4: 1}
    assert slice_(p_plus(2, 2, (-4, 4)), 0) == {1: 1, 2: 2, 3: 3, 4: 4}
    assert slice_(p_minus(1, 2, (-4, 4)), 0) == {-1: -1, -2: -1, -3: -1, -4: -1}
    with pytest.raises(ParameterError):
        p_plus(0)


def test_p_plus_carries_factorial_normalisation():
    # (2 pi i)^k/(k-1)! * sum n^(k-1) y^n  ->  stored coefficient n^(k-1)/(k-1)!
    assert slice_(p_plus(3, 1, (0, 4)), 0) == {1: F(1, 2), 2: 2, 3: F(9, 2), 4: 8}


def test_q1_slices():
    Q1 = q_k(1, 3, (-4, 4))
    assert slice_(Q1, 0) == {0: F(1, 2), 1: 1, 2: 1, 3: 1, 4: 1}
    assert slice_(Q1, 1) == {1: 1, -1: -1}
    assert slice_(Q1, 2) == {2: 1, 1: 1, -1: -1, -2: -1}


def test_q_ladder_small():
    for k in range(1, 4):
        a = deriv_y(q_k(k, 6, (-6, 6)))
        b = q_k(k + 1, 6, (-6, 6)).scale(k)
        assert equal_to_order(a, b)


def test_q_reflection_between_directions():
    # Q_k^NegY(y) = (-1)^k Q_k^PosY(y^-1) for k >= 2
    for k in (2, 3, 4):
        pos = q_k(k, 5, (-6, 6), Direction.POS_Y)
        neg = q_k(k, 5, (-6, 6), Direction.NEG_Y)
        assert equal_to_order(substitute_y_power(pos, -1).scale((-1) ** k), neg)


@pytest.mark.parametrize("m", [2, 3, 5])
def test_twisted_E_plus_equals_minus(m):
    assert first_difference(twisted_E(m, 8, (-6, 6), "+"), twisted_E(m, 8, (-6, 6), "-")) is None


def test_twisted_E2_constant():
    assert coefficient(twisted_E(2, 2, (0, 0)), 0, 0) == F(-1, 12)


def test_twisted_E1_q0_slices():
    assert slice_(twisted_E1("+", 0, (-3, 3)), 0) == {0: F(1, 2), -1: 1, -2: 1, -3: 1}
    assert slice_(twisted_E1("-", 0, (-3, 3)), 0) == {0: F(-1, 2), 1: -1, 2: -1, 3: -1}


def test_twisted_E1_is_minus_opposite_Q1():
    e_minus = twisted_E1("-", 6, (-6, 6))
    q_plus = q_k(1, 6, (-6, 6), Direction.POS_Y)
    assert first_difference(e_minus, -q_plus) is None


def test_twisted_E_rejects_m1():
    with pytest.raises(ParameterError):
        twisted_E(1)


def test_wp_laurent():
    w2 = weierstrass_wp(2, 6, 3)
    assert coefficient(w2[-2], 0, 0) == 1
    w1 = weierstrass_wp(1, 6, 3)
    assert coefficient(w1[0], 0, 0) == F(1, 2)   # pi i = (2 pi i) / 2
    assert w1.two_pi_i_pow == 1
    assert w1.tag.name is FunctionName.WeierstrassWp


def test_wp1_derivative_matches_wp2_away_from_g2():
    # -d/dz wp_1 = wp_2 - G_2 (the G_2 z term of wp_1 differentiates to a constant)
    d1 = weierstrass_wp(1, 8, 4).derivative()
    w2 = weierstrass_wp(2, 8, 4)
    common = set(w2.exponents()) & set(d1.exponents())
    assert len(common) > 3
    for e in sorted(common):
        if e != 0:
            assert equal_to_order(-d1[e], w2[e])


def test_theta_leading_slices():
    lead = [(F(1, 8), F(-1, 2), -1), (F(1, 8), F(1, 2), 1)]
    assert theta11(2, (-4, 4)).terms()[:2] == lead
    assert theta11(2, (-4, 4)).tag.i_pow == 1
    assert theta_j_adm(0, 2, (-4, 4)).terms()[:2] == lead
    assert slice_(theta_i0(1, 2, (-4, 4)), F(1, 8)) == {F(1, 2): 1, F(-1, 2): 1}


def test_eta_pentagonal():
    e = eta(8)
    assert [(q - F(1, 24), c) for q, _, c in e.terms()] == [(0, 1), (1, -1), (2, -1), (5, 1), (7, 1)]
    assert pentagonal(8)[:8] == [1, -1, -1, 0, 0, 1, 0, 1]


def test_eta_power_consistency():
    assert first_difference(eta_pow(24, 6), power(eta(6), 24)) is None
    inv = eta_pow(-1, 6)
    assert [c for _, _, c in inv.terms()][:6] == [1, 1, 2, 3, 5, 7]


def test_theta_derivative_is_eta_cubed():
    assert first_difference(theta_derivative_series(20), eta_cubed_by_squaring(20)) is None


def test_tag_names_cover_spec_list():
    assert {"G2k", "Ek", "Qk", "Em", "theta11", "eta"} <= set(TAGS)

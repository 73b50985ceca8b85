from collections import defaultdict
from fractions import Fraction as F

import pytest

from jacobiq.characters import (
    ConventionRecord,
    admissible_weights_sl2,
    char_level1,
    char_level1_oracle,
    char_level_m43,
    count_admissible_sl2,
    family_level1,
    family_m43,
    literal_level1_leading_exponent,
    resolve_level1_convention,
    resolve_m43_convention,
)
from jacobiq.errors import ParameterError
from jacobiq.series import first_difference, substitute_y_power, truncate
from jacobiq.special import theta_j_adm


def y_summed(s):
    d = defaultdict(F)
    for q, _, c in s.terms():
        d[q] += c
    return [d[q] for q in sorted(d)]


def test_oracle_numerator_and_graded_dims():
    o = char_level1_oracle(0, 4, (-10, 10))
    assert o.q_min == F(-1, 24)
    assert y_summed(o)[:4] == [1, 3, 4, 7]
    lead1 = [t for t in char_level1_oracle(1, 2, (-4, 4)).terms() if t[0] == F(5, 24)]
    assert lead1 == [(F(5, 24), F(-1, 2), 1), (F(5, 24), F(1, 2), 1)]


def test_level1_convention_is_q_squared():
    rec = resolve_level1_convention(4, (-5, 5))
    assert rec.matched
    assert (rec.q_scale, rec.y_scale, rec.q_shift) == (2, 1, 0)
    d = rec.to_dict()
    assert d["matched"] and d["search_space"]["q_scale"] == [1, 2]


def test_literal_exponent_mismatch():
    assert literal_level1_leading_exponent(1) == F(1, 12)
    assert literal_level1_leading_exponent(0) == F(-1, 24)
    literal = ConventionRecord("level1", 1, 1, F(0), False)
    assert char_level1(1, 2, (-4, 4), literal).q_min == F(1, 12)


def test_char_level1_matches_oracle():
    for i in (0, 1):
        assert first_difference(char_level1(i, 8, (-8, 8)), char_level1_oracle(i, 8, (-8, 8))) is None


def test_level1_charge_conjugation():
    for i in (0, 1):
        s = char_level1(i, 6, (-6, 6))
        assert first_difference(substitute_y_power(s, -1), s) is None


def test_m43_pieces():
    den = theta_j_adm(0, 1, (-3, 3))
    assert [t for t in den.terms() if t[0] == F(1, 8)] == [(F(1, 8), F(-1, 2), -1), (F(1, 8), F(1, 2), 1)]
    chi0 = char_level_m43(0, 3, (-20, 10))
    assert chi0.q_min == F(1, 4)
    assert [t for t in chi0.terms() if t[0] == F(1, 4)] == [(F(1, 4), 0, 1)]


def test_m43_convention_and_family():
    rec = resolve_m43_convention(3, (-4, 4))
    assert rec.matched and (rec.q_scale, rec.y_scale) == (3, 1)
    assert rec.search_space["q_shift"] == "not searched"
    fam = family_m43(3, (-6, 6))
    assert fam.c == -6 and fam.kappa == F(-1, 3) and fam.charge_bound == 1
    assert fam.leading_exponents == [F(1, 4), F(-1, 12), F(-1, 12)]
    # two members share a leading exponent, so the distinctness check is reported as failing
    assert not fam.exponents_distinct_mod_1
    for (_, s), e in zip(fam.members, fam.leading_exponents):
        assert s.q_min == e


def test_family_level1():
    fam = family_level1(4, (-6, 6))
    assert fam.kappa == F(1, 4) and fam.c == 1
    assert fam.leading_exponents == [F(-1, 24), F(5, 24)]
    assert fam.exponents_distinct_mod_1
    assert fam.convention.matched


@pytest.mark.parametrize("p, u, n", [(2, 3, 3), (3, 1, 2), (5, 2, 8)])
def test_count(p, u, n):
    assert count_admissible_sl2(p, u) == n
    assert len(admissible_weights_sl2(p, u)) == n


def test_count_u1_line():
    for p in range(2, 11):
        assert count_admissible_sl2(p, 1) == p - 1


def test_admissible_weights_at_minus_four_thirds():
    lams = sorted(l for _, _, l in admissible_weights_sl2(2, 3))
    assert lams == [F(-4, 3), F(-2, 3), 0]


@pytest.mark.parametrize("p, u", [(4, 2), (1, 3), (3, 0)])
def test_count_errors(p, u):
    with pytest.raises(ParameterError):
        count_admissible_sl2(p, u)


def test_member_index_checked():
    with pytest.raises(ParameterError):
        char_level1(2, 2, (-2, 2))
    with pytest.raises(ParameterError):
        char_level_m43(3, 2, (-2, 2))


def test_truncation_consistency():
    big = char_level1(0, 8, (-8, 8))
    small = char_level1(0, 4, (-8, 8))
    assert first_difference(truncate(big, q_max=5), small) is None

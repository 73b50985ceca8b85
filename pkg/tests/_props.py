"""Random series generators and the property checks shared by the property and acceptance suites."""

import random
from fractions import Fraction

from hypothesis import strategies as st

from jacobiq.numeric import eval_series
from jacobiq.series import (
    deriv_q,
    deriv_y,
    equal_to_order,
    first_difference,
    invert_unit,
    make_series,
    mul,
    one,
)

Q_MAX = 4
Y_SPAN = 3


def rand_series(rng: random.Random, n_terms=None, q_lo=0, unit=False):
    n = rng.randint(1, 6) if n_terms is None else n_terms
    terms = []
    if unit:
        terms.append((q_lo, rng.randint(-1, 1), Fraction(rng.choice([1, -1, 2, -3]), rng.randint(1, 3))))
    for _ in range(n):
        q = Fraction(rng.randint(2 * q_lo, 2 * Q_MAX - 1), 2)
        if unit and q <= q_lo:
            q = Fraction(q_lo) + Fraction(1, 2)
        terms.append((q, rng.randint(-Y_SPAN, Y_SPAN), Fraction(rng.randint(-5, 5), rng.randint(1, 4))))
    return make_series(terms, Q_MAX, (-Y_SPAN, Y_SPAN))


@st.composite
def series_st(draw, unit=False):
    seed = draw(st.integers(0, 2**32 - 1))
    return rand_series(random.Random(seed), unit=unit)


def ring_laws(a, b, c) -> bool:
    ab, ba = mul(a, b)[0], mul(b, a)[0]
    ok = equal_to_order(a + b, b + a) and equal_to_order(ab, ba)
    ok &= equal_to_order((a + b) + c, a + (b + c))
    ok &= equal_to_order(mul(ab, c)[0], mul(a, mul(b, c)[0])[0])
    ok &= equal_to_order(mul(a, b + c)[0], mul(a, b)[0] + mul(a, c)[0])
    return bool(ok)


def leibniz(a, b) -> bool:
    p = mul(a, b)[0]
    ly = mul(deriv_y(a), b)[0] + mul(a, deriv_y(b))[0]
    lq = mul(deriv_q(a), b)[0] + mul(a, deriv_q(b))[0]
    return equal_to_order(deriv_y(p), ly) and equal_to_order(deriv_q(p), lq)


def invert_roundtrip(u) -> bool:
    inv = invert_unit(u, y_limit=-12)
    return first_difference(mul(u, inv)[0], one()) is None


def derivations_commute(a) -> bool:
    return equal_to_order(deriv_y(deriv_q(a)), deriv_q(deriv_y(a)))


def eval_linear(a, b, lam: Fraction, alpha: complex, tau: complex) -> float:
    lhs = eval_series(a + b.scale(lam), alpha, tau)
    rhs = eval_series(a, alpha, tau) + float(lam) * eval_series(b, alpha, tau)
    scale = max(1.0, abs(eval_series(a, alpha, tau)), abs(float(lam) * eval_series(b, alpha, tau)))
    return abs(lhs - rhs) / scale


def rand_point(rng: random.Random):
    tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.6, 2.5))
    alpha = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3))
    return alpha, tau


__all__ = ["rand_series", "series_st", "ring_laws", "leibniz", "invert_roundtrip", "derivations_commute",
           "eval_linear", "rand_point"]

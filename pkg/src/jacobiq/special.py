"""Truncated expansions of the Eisenstein, Weierstrass, theta and eta functions.

Everything is normalised to rational coefficients.  Powers of ``2*pi*i`` and
of ``i`` that multiply a generator are recorded on its
:class:`SpecialFunctionTag`, never folded into the coefficients.

``q_order=R`` always means the series is known for every ``q``-exponent
``<= R``, i.e. ``q_max = R + 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from gmpy2 import mpq

from .errors import ParameterError
from .series import Direction, Line, SeriesBox, mul

# -- number theory ----------------------------------------------------------


@lru_cache(maxsize=None)
def _bernoulli_table(n: int) -> tuple[Fraction, ...]:
    # B_m via sum_{j<=m} binom(m+1, j) B_j = 0, with B_1 = -1/2
    b = [Fraction(1)]
    for m in range(1, n + 1):
        s = sum(math.comb(m + 1, j) * b[j] for j in range(m))
        b.append(-s / (m + 1))
    return tuple(b)


def bernoulli(n: int) -> Fraction:
    """Bernoulli number ``B_n`` with ``B_1 = -1/2``."""
    if n < 0:
        raise ParameterError("Bernoulli index must be >= 0")
    return _bernoulli_table(n)[n]


def bernoulli_poly_at_one(n: int) -> Fraction:
    """``B_n(1) = sum_k binom(n, k) B_k``; equals ``B_n`` except ``B_1(1) = 1/2``."""
    return sum((math.comb(n, k) * bernoulli(k) for k in range(n + 1)), Fraction(0))


def sigma(k: int, n: int) -> int:
    """Divisor power sum ``sum_{d | n} d**k``."""
    s = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            s += d**k
            e = n // d
            if e != d:
                s += e**k
        d += 1
    return s


# -- tags ---------------------------------------------------------------------


class FunctionName(enum.Enum):
    EisensteinG = "G2k"
    EisensteinE = "Ek"
    Pplus = "Pplus"
    Pminus = "Pminus"
    Qk = "Qk"
    TwistedE = "Em"
    TwistedE1Plus = "E1plus"
    TwistedE1Minus = "E1minus"
    WeierstrassWp = "wp"
    Theta11 = "theta11"
    ThetaI0 = "theta_i0"
    ThetaJAdm = "theta_j"
    Eta = "eta"


@dataclass(frozen=True)
class SpecialFunctionTag:
    """Which function a series expands, and the symbolic factor it carries.

    The represented function equals ``i**i_pow * (2*pi*i)**two_pi_i_pow``
    times the stored rational series.
    """

    name: FunctionName
    parameters: tuple[int, ...] = ()
    i_pow: int = 0
    two_pi_i_pow: int = 0
    notes: str = field(default="", compare=False)

    def prefactor_dict(self) -> dict:
        return {"i_pow": self.i_pow, "two_pi_i_pow": self.two_pi_i_pow}

    def to_dict(self) -> dict:
        d = {"name": self.name.value, "parameters": list(self.parameters)}
        if self.notes:
            d["notes"] = self.notes
        return d

    def prefactor_value(self) -> complex:
        return (1j) ** self.i_pow * (2j * math.pi) ** self.two_pi_i_pow


def _qmax(q_order) -> Fraction:
    q_order = Fraction(q_order)
    if q_order < 0:
        raise ParameterError("q_order must be >= 0")
    return q_order + 1


def _window(y_window) -> tuple[Fraction, Fraction]:
    lo, hi = Fraction(y_window[0]), Fraction(y_window[1])
    if lo > hi:
        raise ParameterError("empty y-window")
    return lo, hi


def _qseries(coeffs: dict[Fraction, Fraction], q_max, q_den: int, q_floor, tag=None) -> SeriesBox:
    terms = {}
    for e, c in coeffs.items():
        if c:
            n = e * q_den
            terms[(int(n), 0)] = mpq(c.numerator, c.denominator) if isinstance(c, Fraction) else mpq(c)
    return SeriesBox(
        terms, q_den, 1, Fraction(q_max), Fraction(0), Fraction(0), Direction.NEG_Y,
        Fraction(q_floor), None, None, True, True, tag,
    )


# -- Eisenstein series --------------------------------------------------------


def _check_even(k):
    if not isinstance(k, int) or k < 2 or k % 2:
        raise ParameterError(f"Eisenstein weight must be an even integer >= 2, got {k!r}")


def eisenstein_G(k: int, q_order=12) -> SeriesBox:
    """``G_k / (2 pi i)**k = -B_k/k! + 2/(k-1)! sum sigma_{k-1}(m) q**m``."""
    _check_even(k)
    q_max = _qmax(q_order)
    cf = {Fraction(0): -bernoulli(k) / math.factorial(k)}
    c = Fraction(2, math.factorial(k - 1))
    m = 1
    while m < q_max:
        cf[Fraction(m)] = c * sigma(k - 1, m)
        m += 1
    tag = SpecialFunctionTag(FunctionName.EisensteinG, (k,), 0, k)
    return _qseries(cf, q_max, 1, 0, tag)


def eisenstein_E(k: int, q_order=12) -> SeriesBox:
    """Eisenstein series normalised to constant term 1."""
    g = eisenstein_G(k, q_order)
    scale = -Fraction(math.factorial(k)) / bernoulli(k)
    return g.scale(scale).with_tag(SpecialFunctionTag(FunctionName.EisensteinE, (k,)))


# -- two-variable Fourier series P_k^+/- and Q_k -------------------------------


def _check_k(k):
    if not isinstance(k, int) or k < 1:
        raise ParameterError(f"index must be a positive integer, got {k!r}")


def _geometric_block(k, q_max, lo, hi, plus: bool) -> dict[tuple[int, int], mpq]:
    """Coefficients of ``sum_n [n^{k-1} y^n q^{na}/(1-q^n) + (-1)^k n^{k-1} y^{-n} q^{nb}/(1-q^n)]/(k-1)!``.

    ``plus`` selects ``(a, b) = (0, 1)`` (P^+) or ``(1, 0)`` (P^-).
    """
    fact = mpq(1, math.factorial(k - 1))
    sgn = -1 if k % 2 else 1
    a, b = (0, 1) if plus else (1, 0)
    acc: dict[tuple[int, int], mpq] = {}
    qtop = math.ceil(q_max) - 1
    nmax = max(abs(lo), abs(hi))
    for n in range(1, int(math.floor(nmax)) + 1):
        c = mpq(n ** (k - 1)) * fact
        if lo <= n <= hi:
            j = a
            while n * j <= qtop:
                acc[(n * j, n)] = acc.get((n * j, n), 0) + c
                j += 1
        if lo <= -n <= hi:
            j = b
            while n * j <= qtop:
                acc[(n * j, -n)] = acc.get((n * j, -n), 0) + sgn * c
                j += 1
    return acc


def p_plus(k: int, q_order=12, y_window=(-12, 12)) -> SeriesBox:
    """``P_k^+ / (2 pi i)**k`` expanded on the window (direction ``POS_Y``).

    The stored series includes the ``1/(k-1)!`` of the defining display, so
    the tag's prefactor is a pure power ``(2 pi i)**k``.
    """
    _check_k(k)
    q_max = _qmax(q_order)
    lo, hi = _window(y_window)
    terms = _geometric_block(k, q_max, lo, hi, plus=True)
    tag = SpecialFunctionTag(FunctionName.Pplus, (k,), 0, k)
    return SeriesBox(
        terms, 1, 1, q_max, lo, hi, Direction.POS_Y, Fraction(0),
        Line(Fraction(-1), Fraction(0)), None, False, False, tag,
    )


def p_minus(k: int, q_order=12, y_window=(-12, 12)) -> SeriesBox:
    """``P_k^- / (2 pi i)**k`` expanded on the window (direction ``NEG_Y``)."""
    _check_k(k)
    q_max = _qmax(q_order)
    lo, hi = _window(y_window)
    terms = _geometric_block(k, q_max, lo, hi, plus=False)
    tag = SpecialFunctionTag(FunctionName.Pminus, (k,), 0, k)
    return SeriesBox(
        terms, 1, 1, q_max, lo, hi, Direction.NEG_Y, Fraction(0),
        None, Line(Fraction(1), Fraction(0)), False, False, tag,
    )


def q_k(k: int, q_order=12, y_window=(-12, 12), direction: Direction = Direction.POS_Y) -> SeriesBox:
    """``Q_k = delta_{k,1}/2 + (2 pi i)**(-k) P_k^+``.

    With ``direction=NEG_Y`` the same meromorphic function is re-expanded in
    powers of ``y**-1``: as functions ``P_1^+ = P_1^- - 2 pi i`` while
    ``P_k^+ = P_k^-`` for ``k >= 2``, so ``Q_1 = -1/2 + P_1^-/(2 pi i)``.
    """
    _check_k(k)
    if direction is Direction.POS_Y:
        base, const = p_plus(k, q_order, y_window), Fraction(1, 2) if k == 1 else 0
    else:
        base, const = p_minus(k, q_order, y_window), Fraction(-1, 2) if k == 1 else 0
    terms = dict(base.raw_terms())
    if const and base.y_lo <= 0 <= base.y_hi:
        terms[(0, 0)] = terms.get((0, 0), 0) + mpq(const.numerator, const.denominator)
    tag = SpecialFunctionTag(FunctionName.Qk, (k,), notes=direction.value)
    return base._replace(terms=terms, tag=tag)


# -- twisted Eisenstein series E_m ---------------------------------------------


def _exp_coeff(n: int, m: int) -> Fraction:
    """Coefficient of ``w**(m-1)`` in ``exp(n w)``."""
    return Fraction(n ** (m - 1), math.factorial(m - 1))


def _p1_three_variable_coefficient(m: int, sign: str, q_order, y_window) -> SeriesBox:
    """Coefficient of ``w**(m-1)`` (``w = 2 pi i z``) in ``P_1^sign(z, y, q) + 1/w``."""
    q_max = _qmax(q_order)
    lo, hi = _window(y_window)
    qtop = math.ceil(q_max) - 1
    acc: dict[tuple[int, int], Fraction] = {}

    def put(nq, ny, c):
        if lo <= ny <= hi and c:
            acc[(nq, ny)] = acc.get((nq, ny), 0) + c

    # -e^w/(e^w - 1) = -1/w - sum_j B_j(1) w^{j-1} / j!
    put(0, 0, -bernoulli_poly_at_one(m) / math.factorial(m))
    if m == 1:
        if sign == "+":
            for n in range(0, int(math.floor(-lo)) + 1):
                put(0, -n, Fraction(1))
        else:
            for n in range(1, int(math.floor(hi)) + 1):
                put(0, n, Fraction(-1))
    # sum_n [y^{-1}q^n/(1-y^{-1}q^n) e^{nw} - y q^n/(1-y q^n) e^{-nw}]
    for n in range(1, qtop + 1):
        cp = _exp_coeff(n, m)
        cm = _exp_coeff(-n, m)
        j = 1
        while n * j <= qtop:
            put(n * j, -j, cp)
            put(n * j, j, -cm)
            j += 1
    terms = {k: mpq(v.numerator, v.denominator) for k, v in acc.items() if v}
    if m == 1:
        if sign == "+":
            direction, lower, upper, closed = Direction.NEG_Y, None, Line(Fraction(1), Fraction(0)), (False, False)
        else:
            direction, lower, upper, closed = Direction.POS_Y, Line(Fraction(-1), Fraction(0)), None, (False, False)
    else:
        direction = Direction.NEG_Y
        lower, upper = Line(Fraction(-1), Fraction(0)), Line(Fraction(1), Fraction(0))
        closed = (False, False)
    return SeriesBox(
        terms, 1, 1, q_max, lo, hi, direction, Fraction(0), lower, upper, closed[0], closed[1],
    )


def twisted_E(m: int, q_order=12, y_window=(-12, 12), sign: str = "+") -> SeriesBox:
    """Twisted Eisenstein series ``E_m(y, q)`` for ``m >= 2``.

    Extracted as the ``(2 pi i z)**(m-1)`` coefficient of the three-variable
    ``P_1^sign(z, y, q)``; ``sign`` picks which of the two displayed
    expansions is used.
    """
    if not isinstance(m, int) or m < 2:
        raise ParameterError("twisted_E needs m >= 2; use twisted_E1 for m = 1")
    if sign not in ("+", "-"):
        raise ParameterError("sign must be '+' or '-'")
    s = _p1_three_variable_coefficient(m, sign, q_order, y_window)
    return s.with_tag(SpecialFunctionTag(FunctionName.TwistedE, (m,), notes=sign))


def twisted_E1(sign: str, q_order=12, y_window=(-12, 12)) -> SeriesBox:
    """``E_1^sign``: the constant ``w``-coefficient of ``P_1^sign + 1/w``."""
    if sign not in ("+", "-"):
        raise ParameterError("sign must be '+' or '-'")
    s = _p1_three_variable_coefficient(1, sign, q_order, y_window)
    name = FunctionName.TwistedE1Plus if sign == "+" else FunctionName.TwistedE1Minus
    return s.with_tag(SpecialFunctionTag(name, (1,)))


# -- Weierstrass functions -------------------------------------------------------


@dataclass(frozen=True)
class ZLaurent:
    """Laurent series ``sum_e coeffs[e] * w**e`` in ``w = 2 pi i z`` with q-series coefficients.

    The represented function is ``(2 pi i)**two_pi_i_pow`` times the series.
    """

    coeffs: dict
    two_pi_i_pow: int = 0
    tag: SpecialFunctionTag | None = None

    def exponents(self) -> list[int]:
        return sorted(self.coeffs)

    def __getitem__(self, e: int) -> SeriesBox:
        return self.coeffs[e]

    def derivative(self) -> "ZLaurent":
        """``d/dw`` of the series (``d/dz`` carries one more factor ``2 pi i``)."""
        out = {}
        for e, c in self.coeffs.items():
            if e != 0:
                out[e - 1] = c.scale(e)
        return ZLaurent(out, self.two_pi_i_pow + 1, None)


def weierstrass_wp(k: int, z_order: int = 8, q_order=12) -> ZLaurent:
    """Normalised ``wp~_k``: with ``w = 2 pi i z``,

    ``wp~_k = (2 pi i)**k [w**-k + delta_{k,1}/2 + (-1)**k sum_n binom(2n+1, k-1) g_{2n+2} w**(2n+2-k)]``

    where ``g_{2n+2} = G~_{2n+2}/(2 pi i)**(2n+2)``.  The ``1/2`` is the
    ``pi i`` constant of ``wp~_1``.  Terms up to ``w**z_order`` are kept.
    """
    _check_k(k)
    q_max = _qmax(q_order)
    coeffs = {-k: _qseries({Fraction(0): Fraction(1)}, q_max, 1, 0)}
    if k == 1:
        coeffs[0] = _qseries({Fraction(0): Fraction(1, 2)}, q_max, 1, 0)
    sgn = 1 if k % 2 == 0 else -1
    n = 0
    while 2 * n + 2 - k <= z_order:
        b = math.comb(2 * n + 1, k - 1)
        if b:
            e = 2 * n + 2 - k
            g = eisenstein_G(2 * n + 2, q_order).scale(sgn * b)
            g = g.with_tag(None)
            coeffs[e] = coeffs[e] + g if e in coeffs else g
        n += 1
    tag = SpecialFunctionTag(FunctionName.WeierstrassWp, (k,), 0, k)
    return ZLaurent(coeffs, k, tag)


# -- theta and eta functions ---------------------------------------------------------


def lattice_theta(shift, q_scale, y_scale, q_order=12, y_window=(-12, 12), alternating=False) -> SeriesBox:
    """``sum_{n in Z} (+-1)^n y^{y_scale m} q^{q_scale m^2}`` with ``m = n + shift``.

    Each ``q``-slice is finite, so the closed flags are exact.  A tangent line
    to ``y^2 = y_scale^2 q / q_scale`` bounds the support on open sides.
    """
    shift, a, c = Fraction(shift), Fraction(q_scale), int(y_scale)
    if a <= 0 or c == 0:
        raise ParameterError("q_scale must be positive and y_scale nonzero")
    q_max = _qmax(q_order) if not isinstance(q_order, tuple) else Fraction(q_order[0])
    lo, hi = _window(y_window)
    bound = math.isqrt(int(q_max / a) + 1) + 2
    entries = []
    for n in range(-bound - 1, bound + 2):
        m = n + shift
        e = a * m * m
        if e >= q_max:
            continue
        entries.append((e, c * m, -1 if (alternating and n % 2) else 1))
    q_den = 1
    y_den = 1
    for e, y, _ in entries:
        q_den = q_den * e.denominator // math.gcd(q_den, e.denominator)
        y_den = y_den * y.denominator // math.gcd(y_den, y.denominator)
    q_den = q_den * (a * shift * shift).denominator // math.gcd(q_den, (a * shift * shift).denominator)
    terms = {}
    closed_lo = closed_hi = True
    for e, y, s in entries:
        if y < lo:
            closed_lo = False
            continue
        if y > hi:
            closed_hi = False
            continue
        key = (int(e * q_den), int(y * y_den))
        terms[key] = terms.get(key, 0) + s
    terms = {k: mpq(v) for k, v in terms.items() if v}
    b = Fraction(math.isqrt(int(q_max / a)) + 1)
    slope = Fraction(abs(c)) / (2 * a * b)
    icpt = Fraction(abs(c)) * b / 2
    q_floor = min((e for e, _, _ in entries), default=q_max)
    return SeriesBox(
        terms, q_den, y_den, q_max, lo, hi, Direction.NEG_Y, q_floor,
        Line(-slope, -icpt), Line(slope, icpt), closed_lo, closed_hi,
    )


def theta11(q_order=12, y_window=(-12, 12)) -> SeriesBox:
    """``theta(z, tau) / i = sum (-1)^n q^{(n+1/2)^2/2} y^{n+1/2}`` (``y = e^{2 pi i z}``)."""
    s = lattice_theta(Fraction(1, 2), Fraction(1, 2), 1, q_order, y_window, alternating=True)
    return s.with_tag(SpecialFunctionTag(FunctionName.Theta11, (), 1, 0))


def theta_i0(i: int, q_order=12, y_window=(-12, 12)) -> SeriesBox:
    """``theta_{i0} = sum q^{(n+i/2)^2/2} y^{n+i/2}`` with the literal exponents."""
    if i not in (0, 1):
        raise ParameterError("theta_i0 index must be 0 or 1")
    s = lattice_theta(Fraction(i, 2), Fraction(1, 2), 1, q_order, y_window)
    return s.with_tag(SpecialFunctionTag(FunctionName.ThetaI0, (i,)))


def theta_j_adm(j: int, q_order=12, y_window=(-12, 12)) -> SeriesBox:
    """``theta_j = sum (-1)^n y^{n+1/2-j/3} q^{(n+1/2-j/3)^2/2}``, ``j = 0, 1, 2``."""
    if j not in (0, 1, 2):
        raise ParameterError("theta_j index must be 0, 1 or 2")
    s = lattice_theta(Fraction(1, 2) - Fraction(j, 3), Fraction(1, 2), 1, q_order, y_window, alternating=True)
    return s.with_tag(SpecialFunctionTag(FunctionName.ThetaJAdm, (j,)))


def _euler_product(n_terms: int) -> list[int]:
    """Coefficients of ``prod_{k>=1} (1 - q^k)`` below ``q**n_terms``."""
    c = [0] * n_terms
    if n_terms:
        c[0] = 1
    for k in range(1, n_terms):
        for m in range(n_terms - 1, k - 1, -1):
            c[m] -= c[m - k]
    return c


def pentagonal(n_terms: int) -> list[int]:
    """Euler's pentagonal expansion of ``prod (1 - q^k)``, used as an oracle."""
    c = [0] * n_terms
    k = 0
    while True:
        hit = False
        for g in ((k * (3 * k - 1)) // 2, (k * (3 * k + 1)) // 2) if k else (0,):
            if g < n_terms:
                c[g] = (-1) ** k
                hit = True
        if not hit:
            break
        k += 1
    return c


def eta(q_order=12) -> SeriesBox:
    """``eta = q^{1/24} prod (1 - q^n)`` from the product."""
    return eta_pow(1, q_order)


def eta_pow(n: int, q_order=12) -> SeriesBox:
    """``eta**n`` for any integer ``n``, by the power recurrence on the product."""
    if not isinstance(n, int):
        raise ParameterError("eta power must be an integer")
    q_max = _qmax(q_order)
    off = Fraction(n, 24)
    count = max(0, math.ceil(q_max - off))
    f = _euler_product(count)
    # g = f**n via m g_m = sum_k ((n+1)k - m) f_k g_{m-k}
    g = [Fraction(0)] * count
    if count:
        g[0] = Fraction(1)
    for m in range(1, count):
        s = 0
        for k in range(1, m + 1):
            if f[k]:
                s += ((n + 1) * k - m) * f[k] * g[m - k]
        g[m] = Fraction(s, m)
    cf = {off + m: g[m] for m in range(count) if g[m] and off + m < q_max}
    return _qseries(cf, q_max, 24, off, SpecialFunctionTag(FunctionName.Eta, (n,)))


def theta_derivative_series(q_order=50) -> SeriesBox:
    """``sum_n (-1)^n (n + 1/2) q^{(n+1/2)^2/2}``, the normalised ``theta'(0)``."""
    q_max = _qmax(q_order)
    cf = {}
    n = 0
    while True:
        hit = False
        for m in (n, -n - 1):
            e = Fraction((2 * m + 1) ** 2, 8)
            if e < q_max:
                cf[e] = cf.get(e, 0) + (-1) ** (m % 2) * (Fraction(m) + Fraction(1, 2))
                hit = True
        if not hit:
            break
        n += 1
    return _qseries(cf, q_max, 24, Fraction(1, 8))


def eta_cubed_by_squaring(q_order=50) -> SeriesBox:
    e = eta(q_order)
    return mul(mul(e, e)[0], e)[0]


# -- name registry used by the CLI ------------------------------------------------

TAGS = {
    "G2k": "eisenstein_G",
    "Ek": "eisenstein_E",
    "Pplus": "p_plus",
    "Pminus": "p_minus",
    "Qk": "q_k",
    "Em": "twisted_E",
    "E1plus": "twisted_E1",
    "E1minus": "twisted_E1",
    "wp": "weierstrass_wp",
    "theta11": "theta11",
    "theta_i0": "theta_i0",
    "theta_j": "theta_j_adm",
    "eta": "eta",
    "eta_pow": "eta_pow",
}

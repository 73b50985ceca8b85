"""Exact doubly truncated bivariate series in ``y`` and ``q``.

A :class:`SeriesBox` stores finitely many terms ``c * y**e_y * q**e_q`` with
rational exponents on fixed denominator grids, together with the region on
which those terms are *guaranteed* to be the terms of the underlying infinite
series:

* every coefficient with ``q``-exponent ``>= q_max`` is unknown;
* per ``q``-slice, coefficients with ``y``-exponent outside ``y_window`` are
  unknown, unless that side of the window is *closed* (the true series is
  known to have no terms there below ``q_max``).

Two further pieces of metadata make products honest when a side is open:
``q_floor`` bounds the ``q``-support of the true series from below, and the
optional ``lower``/``upper`` lines bound its ``y``-support
(``lower(q) <= y <= upper(q)``).  Every operation propagates these and shrinks
the window conservatively, so "unknown" and "zero" are never confused.

Coefficients are held internally as ``gmpy2.mpq``; the public accessors return
:class:`fractions.Fraction`.
"""

from __future__ import annotations

import enum
import json
import math
from bisect import bisect_left
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from gmpy2 import mpq

from .errors import DirectionError, GridError, NotInvertible, ParameterError, WindowError

Rational = Fraction

__all__ = [
    "Direction",
    "Line",
    "Rational",
    "SeriesBox",
    "WindowReport",
    "add",
    "coefficient",
    "deriv_q",
    "deriv_y",
    "equal_to_order",
    "first_difference",
    "from_json",
    "invert_unit",
    "make_series",
    "monomial",
    "mul",
    "one",
    "power",
    "multiply_monomial",
    "qseries",
    "substitute_q_power",
    "substitute_y_power",
    "to_json",
    "truncate",
    "zero",
]


class Direction(enum.Enum):
    """Laurent expansion direction in ``y`` used when inverting."""

    NEG_Y = "neg_y"
    POS_Y = "pos_y"

    def flipped(self) -> "Direction":
        return Direction.POS_Y if self is Direction.NEG_Y else Direction.NEG_Y


@dataclass(frozen=True)
class Line:
    """The affine bound ``y = slope * q + intercept``."""

    slope: Fraction
    intercept: Fraction

    def at(self, q) -> Fraction:
        return self.slope * Fraction(q) + self.intercept


@dataclass(frozen=True)
class WindowReport:
    guaranteed_q_max: Fraction | None
    guaranteed_y_window: tuple[Fraction, Fraction]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        raise GridError(f"floating exponent/coefficient {x!r} is not allowed; use a fraction")
    return Fraction(x)


def _q(x) -> mpq:
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        return mpq(Fraction(x.strip()).numerator, Fraction(x.strip()).denominator)
    if isinstance(x, float):
        raise GridError(f"floating coefficient {x!r} is not allowed; use a fraction")
    return mpq(x)


def _to_frac(c) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def _min_none(a, b):
    """Minimum where ``None`` means +infinity."""
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _add_none(a, b):
    if a is None or b is None:
        return None
    return a + b


def _line_min(line: Line | None, q0: Fraction, q1: Fraction | None):
    """Minimum of ``line`` on ``[q0, q1]``; ``None`` means -infinity."""
    if line is None:
        return None
    if line.slope >= 0:
        return line.at(q0)
    if q1 is None:
        return None
    return line.at(q1)


def _line_max(line: Line | None, q0: Fraction, q1: Fraction | None):
    """Maximum of ``line`` on ``[q0, q1]``; ``None`` means +infinity."""
    if line is None:
        return None
    if line.slope <= 0:
        return line.at(q0)
    if q1 is None:
        return None
    return line.at(q1)


class SeriesBox:
    """Immutable truncated series ``sum c * y**e_y * q**e_q``.

    Construct with :func:`make_series` or the special-function generators.
    Instances must be treated as read-only.
    """

    __slots__ = (
        "_terms",
        "q_den",
        "y_den",
        "q_max",
        "y_lo",
        "y_hi",
        "direction",
        "q_floor",
        "lower",
        "upper",
        "closed_lo",
        "closed_hi",
        "tag",
    )

    def __init__(
        self,
        terms: Mapping[tuple[int, int], mpq],
        q_den: int,
        y_den: int,
        q_max: Fraction | None,
        y_lo: Fraction,
        y_hi: Fraction,
        direction: Direction,
        q_floor: Fraction,
        lower: Line | None = None,
        upper: Line | None = None,
        closed_lo: bool = False,
        closed_hi: bool = False,
        tag=None,
    ):
        # clip to the declared region and drop zeros
        qlim = None if q_max is None else q_max * q_den
        ylo, yhi = y_lo * y_den, y_hi * y_den
        clean = {}
        for key, c in terms.items():
            if not c:
                continue
            nq, ny = key
            if qlim is not None and nq >= qlim:
                continue
            if ny < ylo or ny > yhi:
                continue
            clean[key] = c
        self._terms = clean
        self.q_den = q_den
        self.y_den = y_den
        self.q_max = q_max
        self.y_lo = y_lo
        self.y_hi = y_hi
        self.direction = direction
        if clean:
            q_floor = min(q_floor, Fraction(min(k[0] for k in clean), q_den))
        self.q_floor = q_floor
        self.lower = lower
        self.upper = upper
        self.closed_lo = closed_lo
        self.closed_hi = closed_hi
        self.tag = tag

    # -- basic accessors -------------------------------------------------

    @property
    def y_window(self) -> tuple[Fraction, Fraction]:
        return (self.y_lo, self.y_hi)

    @property
    def q_min(self) -> Fraction | None:
        """Smallest stored ``q``-exponent; ``q_max`` for the zero series."""
        if not self._terms:
            return self.q_max
        return Fraction(min(k[0] for k in self._terms), self.q_den)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def neutral(self) -> bool:
        """True when both window sides are closed, so direction is irrelevant."""
        return self.closed_lo and self.closed_hi

    def __len__(self) -> int:
        return len(self._terms)

    def raw_terms(self) -> dict[tuple[int, int], mpq]:
        """Grid-integer keyed terms (``q = nq/q_den``, ``y = ny/y_den``)."""
        return self._terms

    def terms(self) -> list[tuple[Fraction, Fraction, Fraction]]:
        """Terms as ``(q_exp, y_exp, coeff)`` in canonical order."""
        out = [
            (Fraction(nq, self.q_den), Fraction(ny, self.y_den), _to_frac(c))
            for (nq, ny), c in self._terms.items()
        ]
        out.sort(key=lambda t: (t[0], t[1]))
        return out

    def q_exponents(self) -> list[Fraction]:
        return sorted({Fraction(nq, self.q_den) for nq, _ in self._terms})

    def slice(self, q_exp) -> dict[Fraction, Fraction]:
        """The ``y``-Laurent polynomial at a fixed ``q``-exponent."""
        qe = _frac(q_exp) * self.q_den
        if qe.denominator != 1:
            return {}
        nq = int(qe)
        return {
            Fraction(ny, self.y_den): _to_frac(c)
            for (k, ny), c in sorted(self._terms.items())
            if k == nq
        }

    def known(self, q_exp, y_exp) -> bool:
        """Whether the coefficient at ``(q_exp, y_exp)`` is guaranteed."""
        q_exp, y_exp = _frac(q_exp), _frac(y_exp)
        if q_exp < self.q_floor:
            return True
        if self.q_max is not None and q_exp >= self.q_max:
            return False
        if y_exp < self.y_lo:
            if self.closed_lo:
                return True
            lo = self.lower.at(q_exp) if self.lower is not None else None
            return lo is not None and y_exp < lo
        if y_exp > self.y_hi:
            if self.closed_hi:
                return True
            hi = self.upper.at(q_exp) if self.upper is not None else None
            return hi is not None and y_exp > hi
        return True

    def with_tag(self, tag) -> "SeriesBox":
        return self._replace(tag=tag)

    def _replace(self, **kw) -> "SeriesBox":
        fields = dict(
            terms=self._terms,
            q_den=self.q_den,
            y_den=self.y_den,
            q_max=self.q_max,
            y_lo=self.y_lo,
            y_hi=self.y_hi,
            direction=self.direction,
            q_floor=self.q_floor,
            lower=self.lower,
            upper=self.upper,
            closed_lo=self.closed_lo,
            closed_hi=self.closed_hi,
            tag=self.tag,
        )
        fields.update(kw)
        return SeriesBox(**fields)

    def regrid(self, q_den: int, y_den: int) -> "SeriesBox":
        """Same series on finer grids (``q_den``/``y_den`` multiples of the current)."""
        if q_den % self.q_den or y_den % self.y_den:
            raise GridError("new grid must refine the old one")
        fq, fy = q_den // self.q_den, y_den // self.y_den
        if fq == 1 and fy == 1:
            return self
        terms = {(nq * fq, ny * fy): c for (nq, ny), c in self._terms.items()}
        return self._replace(terms=terms, q_den=q_den, y_den=y_den)

    # -- operators -------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, SeriesBox):
            other = _constant_like(self, other)
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        if not isinstance(other, SeriesBox):
            other = _constant_like(self, other)
        return add(self, -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, SeriesBox):
            return mul(self, other)[0]
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, c) -> "SeriesBox":
        c = _q(c)
        return self._replace(terms={k: v * c for k, v in self._terms.items()}, tag=None)

    def __eq__(self, other):
        if not isinstance(other, SeriesBox):
            return NotImplemented
        return (
            self.terms() == other.terms()
            and self.q_max == other.q_max
            and self.y_window == other.y_window
            and self.direction is other.direction
        )

    __hash__ = None

    def __repr__(self):
        n = len(self._terms)
        head = ", ".join(f"{c}*y^{y}*q^{q}" for q, y, c in self.terms()[:4])
        more = ", ..." if n > 4 else ""
        return (
            f"SeriesBox([{head}{more}], n={n}, q_max={self.q_max}, "
            f"y_window=[{self.y_lo}, {self.y_hi}], closed=({self.closed_lo}, {self.closed_hi}), "
            f"{self.direction.value})"
        )


# ---------------------------------------------------------------------------
# construction


def make_series(
    terms: Iterable = (),
    q_max=None,
    y_window=None,
    direction: Direction = Direction.NEG_Y,
    *,
    q_den: int | None = None,
    y_den: int | None = None,
    q_floor=None,
    closed: tuple[bool, bool] = (True, True),
    lower: Line | None = None,
    upper: Line | None = None,
    tag=None,
) -> SeriesBox:
    """Build a canonical series from ``(q_exp, y_exp, coeff)`` triples.

    ``q_max=None`` declares the data exact in ``q`` (a polynomial).  With the
    default ``closed=(True, True)`` the data are taken to be the complete
    ``y``-support; pass ``closed=(False, False)`` for a window cut out of an
    infinite series.
    """
    parsed = []
    for t in terms:
        qe, ye, c = t
        parsed.append((_frac(qe), _frac(ye), _q(c)))
    q_max = None if q_max is None else _frac(q_max)
    if q_den is None:
        q_den = 1
        for qe, _, _ in parsed:
            q_den = _lcm(q_den, qe.denominator)
    if y_den is None:
        y_den = 1
        for _, ye, _ in parsed:
            y_den = _lcm(y_den, ye.denominator)
    if y_window is None:
        if parsed:
            y_window = (min(p[1] for p in parsed), max(p[1] for p in parsed))
        else:
            y_window = (Fraction(0), Fraction(0))
    y_lo, y_hi = _frac(y_window[0]), _frac(y_window[1])
    if y_lo > y_hi:
        raise WindowError(f"empty y-window [{y_lo}, {y_hi}]")
    acc: dict[tuple[int, int], mpq] = defaultdict(lambda: mpq(0))
    for qe, ye, c in parsed:
        nq, ny = qe * q_den, ye * y_den
        if nq.denominator != 1 or ny.denominator != 1:
            raise GridError(f"exponent ({qe}, {ye}) is off the grid 1/{q_den} x 1/{y_den}")
        if q_max is not None and qe >= q_max:
            raise WindowError(f"q-exponent {qe} >= q_max {q_max}")
        if ye < y_lo or ye > y_hi:
            raise WindowError(f"y-exponent {ye} outside window [{y_lo}, {y_hi}]")
        acc[(int(nq), int(ny))] += c
    data = {k: v for k, v in acc.items() if v}
    if q_floor is None:
        if data:
            q_floor = Fraction(min(k[0] for k in data), q_den)
        elif q_max is not None:
            q_floor = q_max
        else:
            q_floor = Fraction(0)
    return SeriesBox(
        data,
        q_den,
        y_den,
        q_max,
        y_lo,
        y_hi,
        direction,
        _frac(q_floor),
        lower,
        upper,
        bool(closed[0]),
        bool(closed[1]),
        tag,
    )


def zero(q_max=None, y_window=(0, 0), direction: Direction = Direction.NEG_Y) -> SeriesBox:
    return make_series([], q_max, y_window, direction)


def one(q_max=None, direction: Direction = Direction.NEG_Y) -> SeriesBox:
    return make_series([(0, 0, 1)], q_max, (0, 0), direction)


def monomial(q_exp, y_exp, coeff=1, q_max=None, direction: Direction = Direction.NEG_Y) -> SeriesBox:
    return make_series([(q_exp, y_exp, coeff)], q_max, None, direction)


def qseries(coeffs: Iterable, q_max=None, *, offset=0, step=1, direction=Direction.NEG_Y) -> SeriesBox:
    """A ``y``-free series ``q**offset * sum coeffs[n] q**(n*step)``."""
    offset, step = _frac(offset), _frac(step)
    coeffs = list(coeffs)
    if q_max is None:
        q_max = offset + step * len(coeffs)
    terms = [(offset + n * step, 0, c) for n, c in enumerate(coeffs) if c]
    q_den = _lcm(offset.denominator, step.denominator)
    return make_series(terms, q_max, (0, 0), direction, q_den=q_den, y_den=1, q_floor=offset)


def _constant_like(a: SeriesBox, c) -> SeriesBox:
    return make_series([(0, 0, c)] if c else [], None, (0, 0), a.direction, q_floor=Fraction(0))


# ---------------------------------------------------------------------------
# window bookkeeping helpers


def _eff_lower(a: SeriesBox) -> Line | None:
    if a.lower is not None:
        return a.lower
    if a.closed_lo:
        return Line(Fraction(0), a.y_lo)
    return None


def _eff_upper(a: SeriesBox) -> Line | None:
    if a.upper is not None:
        return a.upper
    if a.closed_hi:
        return Line(Fraction(0), a.y_hi)
    return None


def _support_min(a: SeriesBox, q0, q1):
    """Lower bound of the true ``y``-support of ``a`` for ``q`` in ``[q0, q1]``."""
    cands = []
    m = _line_min(a.lower, q0, q1)
    if m is not None:
        cands.append(m)
    if a.closed_lo:
        cands.append(a.y_lo)
    return max(cands) if cands else None


def _support_max(a: SeriesBox, q0, q1):
    cands = []
    m = _line_max(a.upper, q0, q1)
    if m is not None:
        cands.append(m)
    if a.closed_hi:
        cands.append(a.y_hi)
    return min(cands) if cands else None


def _effectively_closed(a: SeriesBox) -> tuple[bool, bool]:
    """Closedness, also granted when the envelope already lies inside the window."""
    lo, hi = a.closed_lo, a.closed_hi
    if not lo and a.lower is not None and a.q_max is not None:
        m = _line_min(a.lower, a.q_floor, a.q_max)
        lo = m is not None and m >= a.y_lo
    if not hi and a.upper is not None and a.q_max is not None:
        m = _line_max(a.upper, a.q_floor, a.q_max)
        hi = m is not None and m <= a.y_hi
    return lo, hi


def _merge_direction(a: SeriesBox, b: SeriesBox) -> Direction:
    if a.direction is b.direction:
        return a.direction
    if a.neutral:
        return b.direction
    if b.neutral:
        return a.direction
    raise DirectionError(
        f"cannot combine {a.direction.value} and {b.direction.value} expansions with unbounded y-support"
    )


def _common_grid(a: SeriesBox, b: SeriesBox) -> tuple[SeriesBox, SeriesBox, int, int]:
    qd, yd = _lcm(a.q_den, b.q_den), _lcm(a.y_den, b.y_den)
    return a.regrid(qd, yd), b.regrid(qd, yd), qd, yd


def _sum_lower(la: Line | None, lb: Line | None, qf: Fraction) -> Line | None:
    if la is None or lb is None:
        return None
    if la.slope > lb.slope:
        la, lb = lb, la
    return Line(la.slope, min(la.intercept, lb.intercept + (lb.slope - la.slope) * qf))


def _sum_upper(la: Line | None, lb: Line | None, qf: Fraction) -> Line | None:
    if la is None or lb is None:
        return None
    if la.slope < lb.slope:
        la, lb = lb, la
    return Line(la.slope, max(la.intercept, lb.intercept + (lb.slope - la.slope) * qf))


def _prod_lower(la: Line | None, lb: Line | None, qa: Fraction, qb: Fraction) -> Line | None:
    if la is None or lb is None:
        return None
    c = la.intercept + lb.intercept
    if lb.slope >= la.slope:
        return Line(la.slope, c + (lb.slope - la.slope) * qb)
    return Line(lb.slope, c + (la.slope - lb.slope) * qa)


def _prod_upper(la: Line | None, lb: Line | None, qa: Fraction, qb: Fraction) -> Line | None:
    if la is None or lb is None:
        return None
    c = la.intercept + lb.intercept
    if lb.slope >= la.slope:
        return Line(lb.slope, c - (lb.slope - la.slope) * qa)
    return Line(la.slope, c + (lb.slope - la.slope) * qb)


# ---------------------------------------------------------------------------
# ring operations


def add(a: SeriesBox, b: SeriesBox) -> SeriesBox:
    """Termwise sum on the intersection of the guaranteed regions."""
    direction = _merge_direction(a, b)
    a, b, qd, yd = _common_grid(a, b)
    q_max = _min_none(a.q_max, b.q_max)
    alo, ahi = _effectively_closed(a)
    blo, bhi = _effectively_closed(b)
    if alo and blo:
        y_lo, closed_lo = min(a.y_lo, b.y_lo), True
    elif alo:
        y_lo, closed_lo = b.y_lo, False
    elif blo:
        y_lo, closed_lo = a.y_lo, False
    else:
        y_lo, closed_lo = max(a.y_lo, b.y_lo), False
    if ahi and bhi:
        y_hi, closed_hi = max(a.y_hi, b.y_hi), True
    elif ahi:
        y_hi, closed_hi = b.y_hi, False
    elif bhi:
        y_hi, closed_hi = a.y_hi, False
    else:
        y_hi, closed_hi = min(a.y_hi, b.y_hi), False
    if y_lo > y_hi:
        raise WindowError("sum has an empty guaranteed y-window")
    terms = dict(a.raw_terms())
    for k, c in b.raw_terms().items():
        v = terms.get(k)
        terms[k] = c if v is None else v + c
    q_floor = min(a.q_floor, b.q_floor)
    return SeriesBox(
        terms,
        qd,
        yd,
        q_max,
        y_lo,
        y_hi,
        direction,
        q_floor,
        _sum_lower(_eff_lower(a), _eff_lower(b), q_floor),
        _sum_upper(_eff_upper(a), _eff_upper(b), q_floor),
        closed_lo,
        closed_hi,
    )


def _slices(a: SeriesBox) -> dict[int, tuple[list[int], list[mpq]]]:
    grouped: dict[int, list[tuple[int, mpq]]] = defaultdict(list)
    for (nq, ny), c in a.raw_terms().items():
        grouped[nq].append((ny, c))
    out = {}
    for nq, items in grouped.items():
        items.sort()
        out[nq] = ([y for y, _ in items], [c for _, c in items])
    return out


def _convolve(sa, sb, qlim, ylo, yhi, acc):
    """Accumulate the Cauchy product of slice maps into ``acc``."""
    for qa, (ya, ca) in sa.items():
        for qb, (yb, cb) in sb.items():
            nq = qa + qb
            if qlim is not None and nq >= qlim:
                continue
            out = acc[nq]
            nb = len(yb)
            for y1, c1 in zip(ya, ca):
                j = bisect_left(yb, ylo - y1)
                top = yhi - y1
                while j < nb:
                    y2 = yb[j]
                    if y2 > top:
                        break
                    y = y1 + y2
                    v = out.get(y)
                    out[y] = c1 * cb[j] if v is None else v + c1 * cb[j]
                    j += 1


def mul(a: SeriesBox, b: SeriesBox) -> tuple[SeriesBox, WindowReport]:
    """Cauchy product with the region on which it is complete."""
    direction = _merge_direction(a, b)
    a, b, qd, yd = _common_grid(a, b)
    q_max = _min_none(_add_none(a.q_max, b.q_floor), _add_none(b.q_max, a.q_floor))
    # q-ranges actually paired below q_max
    a_q1 = None if q_max is None else q_max - b.q_floor
    b_q1 = None if q_max is None else q_max - a.q_floor
    alo, ahi = _effectively_closed(a)
    blo, bhi = _effectively_closed(b)

    hi_c, lo_c = [], []
    if not ahi:
        m = _support_min(b, b.q_floor, b_q1)
        if m is None:
            raise WindowError("product y-window vanishes: open upper side meets unbounded-below support")
        hi_c.append(a.y_hi + m)
    if not bhi:
        m = _support_min(a, a.q_floor, a_q1)
        if m is None:
            raise WindowError("product y-window vanishes: open upper side meets unbounded-below support")
        hi_c.append(b.y_hi + m)
    if not alo:
        m = _support_max(b, b.q_floor, b_q1)
        if m is None:
            raise WindowError("product y-window vanishes: open lower side meets unbounded-above support")
        lo_c.append(a.y_lo + m)
    if not blo:
        m = _support_max(a, a.q_floor, a_q1)
        if m is None:
            raise WindowError("product y-window vanishes: open lower side meets unbounded-above support")
        lo_c.append(b.y_lo + m)
    full_hi, full_lo = a.y_hi + b.y_hi, a.y_lo + b.y_lo
    y_hi = min(hi_c) if hi_c else full_hi
    y_lo = max(lo_c) if lo_c else full_lo
    if y_lo > y_hi:
        raise WindowError(f"product has an empty guaranteed y-window [{y_lo}, {y_hi}]")

    qlim = None if q_max is None else q_max * qd
    if qlim is not None:
        qlim = math.ceil(qlim)
    ylo_i, yhi_i = math.ceil(y_lo * yd), math.floor(y_hi * yd)
    acc: dict[int, dict[int, mpq]] = defaultdict(dict)
    _convolve(_slices(a), _slices(b), qlim, ylo_i, yhi_i, acc)
    terms = {(nq, ny): c for nq, row in acc.items() for ny, c in row.items() if c}
    q_floor = a.q_floor + b.q_floor
    out = SeriesBox(
        terms,
        qd,
        yd,
        q_max,
        y_lo,
        y_hi,
        direction,
        q_floor,
        _prod_lower(_eff_lower(a), _eff_lower(b), a.q_floor, b.q_floor),
        _prod_upper(_eff_upper(a), _eff_upper(b), a.q_floor, b.q_floor),
        not lo_c,
        not hi_c,
    )
    return out, WindowReport(q_max, (y_lo, y_hi))


def power(a: SeriesBox, n: int) -> SeriesBox:
    """``a**n`` for ``n >= 0`` by repeated squaring."""
    if n < 0:
        raise ParameterError("use invert_unit for negative powers")
    result = one(None, a.direction)
    base = a
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


def invert_unit(a: SeriesBox, direction: Direction | None = None, *, y_limit=None, q_max=None) -> SeriesBox:
    """Multiplicative inverse, expanded in ``direction`` (default ``a.direction``).

    The leading ``q``-slice must have an extreme monomial on the side fixed by
    the direction: its highest ``y``-power for ``NEG_Y``, lowest for ``POS_Y``.
    ``y_limit`` is the far end of the output ``y``-window (lowest exponent kept
    for ``NEG_Y``); ``q_max`` overrides the output truncation.
    """
    direction = direction or a.direction
    if direction is Direction.POS_Y:
        flipped = substitute_y_power(a, -1)
        lim = None if y_limit is None else -_frac(y_limit)
        inv = invert_unit(flipped, Direction.NEG_Y, y_limit=lim, q_max=q_max)
        return substitute_y_power(inv, -1)
    if a.is_zero:
        raise NotInvertible("the zero series is not invertible")
    qd, yd = a.q_den, a.y_den
    q0 = a.q_min
    if q0 != a.q_floor:
        raise WindowError("leading slice of the series is not inside its guaranteed window")
    alo, ahi = _effectively_closed(a)
    raw = a.raw_terms()
    nq0 = int(q0 * qd)
    lead = [(ny, c) for (nq, ny), c in raw.items() if nq == nq0]
    ny0, c0 = max(lead)
    env_top = _line_max(a.upper, q0, q0)
    if not (ahi or a.closed_hi or (env_top is not None and env_top <= a.y_hi)):
        raise NotInvertible("leading slice has no highest y-monomial inside the window")

    # output truncation (offset coordinates q' = q - q0)
    if q_max is None:
        if a.q_max is None:
            raise ParameterError("q_max is required to invert a series exact in q")
        q_out = a.q_max - 2 * q0
    else:
        q_out = _frac(q_max)
        if a.q_max is not None and q_out > a.q_max - 2 * q0:
            raise WindowError("requested q_max exceeds what the input window guarantees")
    if not ahi:
        # upper side open beyond the leading slice: restrict to where the envelope is inside
        up = a.upper
        if up is None or up.slope <= 0:
            raise WindowError("inverse needs a closed upper side in NEG_Y direction")
        q_ok = (a.y_hi - up.intercept) / up.slope
        q_out = min(q_out, q_ok - 2 * q0)
    qmax_off = q_out + q0
    qlim = math.ceil(qmax_off * qd)
    if qlim <= 0:
        raise WindowError("nothing of the inverse is guaranteed")

    inv_c0 = 1 / c0
    r: dict[int, list[tuple[int, mpq]]] = defaultdict(list)
    for (nq, ny), c in raw.items():
        if (nq, ny) == (nq0, ny0):
            continue
        dq, dy = nq - nq0, ny - ny0
        if dq < qlim:
            r[dq].append((dy, -c * inv_c0))
    # slope bound t (grid units): r-terms at dq > 0 satisfy dy <= t * dq
    t = Fraction(0)
    for dq, items in r.items():
        if dq > 0:
            for dy, _ in items:
                t = max(t, Fraction(dy, dq))
    lo_off = (a.y_lo * yd) - ny0  # lowest known r-exponent (grid)
    if y_limit is None:
        target = math.floor(lo_off) if alo else None
    else:
        target = math.floor(_frac(y_limit) * yd + ny0)
    if not alo:
        need = math.ceil(lo_off + t * qlim)
        target = need if target is None else max(target, need)
    cut = math.floor(target - t * qlim)

    # g = 1/(1 - r0), r0 the leading slice of r (all dy < 0)
    r0 = sorted(r.get(0, []), reverse=True)
    gdepth = cut - math.ceil(t * qlim)
    g = {0: mpq(1)}
    for y in range(-1, gdepth - 1, -1):
        s = mpq(0)
        for dy, c in r0:
            prev = g.get(y - dy)
            if prev is not None:
                s += c * prev
        if s:
            g[y] = s
    g_items = sorted(g.items(), reverse=True)

    slices: dict[int, dict[int, mpq]] = {}
    pos_r = sorted((dq, sorted(items)) for dq, items in r.items() if dq > 0)
    for Q in range(0, qlim):
        if Q == 0:
            c = {0: mpq(1)}
        else:
            c = {}
            for dq, items in pos_r:
                if dq > Q:
                    break
                prev = slices.get(Q - dq)
                if not prev:
                    continue
                for dy, cr in items:
                    for y, cb in prev.items():
                        yy = y + dy
                        if yy < cut:
                            continue
                        v = c.get(yy)
                        c[yy] = cr * cb if v is None else v + cr * cb
            if not c:
                continue
        out: dict[int, mpq] = {}
        for y, cv in c.items():
            if not cv:
                continue
            for gy, gv in g_items:
                yy = y + gy
                if yy < cut:
                    break
                v = out.get(yy)
                out[yy] = cv * gv if v is None else v + cv * gv
        out = {y: v for y, v in out.items() if v}
        if out:
            slices[Q] = out

    terms = {}
    top = -ny0
    for Q, row in slices.items():
        for y, v in row.items():
            if y >= target:
                terms[(Q - nq0, y - ny0)] = v * inv_c0
                top = max(top, y - ny0)
    y_lo = Fraction(target - ny0, yd)
    y_hi = Fraction(top, yd)
    tq = t * qd / yd  # slope in exponent units
    upper = Line(tq, tq * q0 - Fraction(ny0, yd))
    # nothing can fall below the target when r never lowers the y-degree
    closed_lo = alo and all(dy >= 0 for items in r.values() for dy, _ in items)
    return SeriesBox(
        terms,
        qd,
        yd,
        q_out,
        y_lo,
        max(y_hi, y_lo),
        Direction.NEG_Y,
        -q0,
        None,
        upper,
        closed_lo,
        True,
    )


# ---------------------------------------------------------------------------
# derivations and substitutions


def deriv_y(a: SeriesBox) -> SeriesBox:
    """The derivation ``y d/dy``: ``c y^e q^f -> e c y^e q^f``."""
    yd = a.y_den
    return a._replace(
        terms={k: c * mpq(k[1], yd) for k, c in a.raw_terms().items() if k[1]}, tag=None
    )


def deriv_q(a: SeriesBox) -> SeriesBox:
    """The derivation ``q d/dq``."""
    qd = a.q_den
    return a._replace(
        terms={k: c * mpq(k[0], qd) for k, c in a.raw_terms().items() if k[0]}, tag=None
    )


def substitute_q_power(a: SeriesBox, k: int) -> SeriesBox:
    """``q -> q**k`` for a positive integer ``k``."""
    if not isinstance(k, int) or k < 1:
        raise ParameterError("q-substitution power must be a positive integer")
    terms = {(nq * k, ny): c for (nq, ny), c in a.raw_terms().items()}
    scale = lambda ln: None if ln is None else Line(ln.slope / k, ln.intercept)  # noqa: E731
    return a._replace(
        terms=terms,
        q_max=None if a.q_max is None else a.q_max * k,
        q_floor=a.q_floor * k,
        lower=scale(a.lower),
        upper=scale(a.upper),
        tag=None,
    )


def substitute_y_power(a: SeriesBox, c: int) -> SeriesBox:
    """``y -> y**c`` for a nonzero integer ``c``; ``c < 0`` flips the direction."""
    if not isinstance(c, int) or c == 0:
        raise ParameterError("y-substitution power must be a nonzero integer")
    terms = {(nq, ny * c): v for (nq, ny), v in a.raw_terms().items()}

    def sc(ln):
        return None if ln is None else Line(ln.slope * c, ln.intercept * c)

    if c > 0:
        return a._replace(
            terms=terms,
            y_lo=a.y_lo * c,
            y_hi=a.y_hi * c,
            lower=sc(a.lower),
            upper=sc(a.upper),
            tag=None,
        )
    return a._replace(
        terms=terms,
        y_lo=a.y_hi * c,
        y_hi=a.y_lo * c,
        lower=sc(a.upper),
        upper=sc(a.lower),
        closed_lo=a.closed_hi,
        closed_hi=a.closed_lo,
        direction=a.direction.flipped(),
        tag=None,
    )


def multiply_monomial(a: SeriesBox, q_exp, y_exp, coeff=1) -> SeriesBox:
    """``coeff * q**q_exp * y**y_exp * a`` (exact shift, windows move along)."""
    q_exp, y_exp = _frac(q_exp), _frac(y_exp)
    qd = _lcm(a.q_den, q_exp.denominator)
    yd = _lcm(a.y_den, y_exp.denominator)
    a = a.regrid(qd, yd)
    dq, dy = int(q_exp * qd), int(y_exp * yd)
    c = _q(coeff)
    terms = {(nq + dq, ny + dy): v * c for (nq, ny), v in a.raw_terms().items()}

    def sh(ln):
        return None if ln is None else Line(ln.slope, ln.intercept + y_exp - ln.slope * q_exp)

    return a._replace(
        terms=terms,
        q_max=None if a.q_max is None else a.q_max + q_exp,
        q_floor=a.q_floor + q_exp,
        y_lo=a.y_lo + y_exp,
        y_hi=a.y_hi + y_exp,
        lower=sh(a.lower),
        upper=sh(a.upper),
        tag=None,
    )


def truncate(a: SeriesBox, q_max=None, y_window=None) -> SeriesBox:
    """Shrink the guaranteed region; never enlarges it."""
    new_q = a.q_max if q_max is None else _min_none(a.q_max, _frac(q_max))
    lo, hi = a.y_window if y_window is None else (_frac(y_window[0]), _frac(y_window[1]))
    lo, hi = max(lo, a.y_lo), min(hi, a.y_hi)
    if lo > hi:
        raise WindowError("truncation leaves an empty y-window")
    qlim = None if new_q is None else new_q * a.q_den
    stored = [k for k in a.raw_terms() if qlim is None or k[0] < qlim]
    below = any(k[1] < lo * a.y_den for k in stored)
    above = any(k[1] > hi * a.y_den for k in stored)
    closed_lo = a.closed_lo and (lo == a.y_lo or not below)
    closed_hi = a.closed_hi and (hi == a.y_hi or not above)
    if closed_lo and new_q != a.q_max and lo != a.y_lo:
        closed_lo = not below
    return a._replace(q_max=new_q, y_lo=lo, y_hi=hi, closed_lo=closed_lo, closed_hi=closed_hi)


# ---------------------------------------------------------------------------
# queries


def coefficient(a: SeriesBox, q_exp, y_exp) -> Fraction:
    """Exact coefficient; raises :class:`WindowError` where it is unknown."""
    q_exp, y_exp = _frac(q_exp), _frac(y_exp)
    if not a.known(q_exp, y_exp):
        raise WindowError(f"coefficient at q^{q_exp} y^{y_exp} is outside the guaranteed window")
    nq, ny = q_exp * a.q_den, y_exp * a.y_den
    if nq.denominator != 1 or ny.denominator != 1:
        return Fraction(0)
    c = a.raw_terms().get((int(nq), int(ny)))
    return Fraction(0) if c is None else _to_frac(c)


def _region(a: SeriesBox, b: SeriesBox, q_bound, y_window):
    q_common = _min_none(a.q_max, b.q_max)
    if q_bound is None:
        q_bound = q_common
    else:
        q_bound = _frac(q_bound)
        if q_common is not None and q_bound > q_common:
            raise WindowError(f"q-bound {q_bound} exceeds guaranteed q_max {q_common}")
    alo, ahi = _effectively_closed(a)
    blo, bhi = _effectively_closed(b)
    lo_a = None if alo else a.y_lo
    lo_b = None if blo else b.y_lo
    hi_a = None if ahi else a.y_hi
    hi_b = None if bhi else b.y_hi
    lo_g = max([x for x in (lo_a, lo_b) if x is not None], default=None)
    hi_g = min([x for x in (hi_a, hi_b) if x is not None], default=None)
    if y_window is None:
        lo = lo_g if lo_g is not None else min(a.y_lo, b.y_lo)
        hi = hi_g if hi_g is not None else max(a.y_hi, b.y_hi)
    else:
        lo, hi = _frac(y_window[0]), _frac(y_window[1])
        if (lo_g is not None and lo < lo_g) or (hi_g is not None and hi > hi_g):
            raise WindowError(f"y-window [{lo}, {hi}] exceeds the guaranteed window")
    return q_bound, lo, hi


def first_difference(a: SeriesBox, b: SeriesBox, q_bound=None, y_window=None):
    """First ``(q, y, coeff_a, coeff_b)`` where ``a`` and ``b`` differ, in canonical order.

    The comparison region defaults to the common guaranteed region.
    Returns ``None`` when the series agree on it.
    """
    q_bound, lo, hi = _region(a, b, q_bound, y_window)
    keys = set()
    for s in (a, b):
        for (nq, ny) in s.raw_terms():
            keys.add((Fraction(nq, s.q_den), Fraction(ny, s.y_den)))
    diffs = []
    for qe, ye in keys:
        if q_bound is not None and qe >= q_bound:
            continue
        if ye < lo or ye > hi:
            continue
        ca, cb = coefficient(a, qe, ye), coefficient(b, qe, ye)
        if ca != cb:
            diffs.append((qe, ye, ca, cb))
    if not diffs:
        return None
    return min(diffs)


def equal_to_order(a: SeriesBox, b: SeriesBox, q_bound=None, y_window=None) -> bool:
    """Exact equality of all coefficients in the requested guaranteed region."""
    return first_difference(a, b, q_bound, y_window) is None


# ---------------------------------------------------------------------------
# JSON interchange


def _fs(x: Fraction | None) -> str | None:
    return None if x is None else str(Fraction(x))


def to_dict(a: SeriesBox) -> dict:
    d = {
        "q_den": a.q_den,
        "y_den": a.y_den,
        "q_max": _fs(a.q_max),
        "y_window": [_fs(a.y_lo), _fs(a.y_hi)],
        "direction": a.direction.value,
        "terms": [{"q": _fs(q), "y": _fs(y), "c": _fs(c)} for q, y, c in a.terms()],
        "q_floor": _fs(a.q_floor),
        "closed": [a.closed_lo, a.closed_hi],
        "support": {
            "lower": None if a.lower is None else [_fs(a.lower.slope), _fs(a.lower.intercept)],
            "upper": None if a.upper is None else [_fs(a.upper.slope), _fs(a.upper.intercept)],
        },
    }
    if a.tag is not None and hasattr(a.tag, "to_dict"):
        d["tag"] = a.tag.to_dict()
        d["prefactor"] = a.tag.prefactor_dict()
    return d


def to_json(a: SeriesBox, **kw) -> str:
    return json.dumps(to_dict(a), **kw)


def from_dict(d: dict) -> SeriesBox:
    """Parse the interchange format.

    Missing ``closed``/``support`` keys mean open window sides with no support
    information, which is the conservative reading of a bare window.
    """
    line = lambda v: None if v is None else Line(Fraction(v[0]), Fraction(v[1]))  # noqa: E731
    support = d.get("support") or {}
    q_max = d.get("q_max")
    return make_series(
        [(t["q"], t["y"], t["c"]) for t in d.get("terms", [])],
        None if q_max is None else Fraction(q_max),
        (Fraction(d["y_window"][0]), Fraction(d["y_window"][1])),
        Direction(d.get("direction", "neg_y")),
        q_den=int(d["q_den"]),
        y_den=int(d["y_den"]),
        q_floor=None if d.get("q_floor") is None else Fraction(d["q_floor"]),
        closed=tuple(d.get("closed", (False, False))),
        lower=line(support.get("lower")),
        upper=line(support.get("upper")),
    )


def from_json(s: str) -> SeriesBox:
    return from_dict(json.loads(s))

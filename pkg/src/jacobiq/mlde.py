"""Flat-connection systems, scalar MLDEs and their exact structural checks.

A system acts on a vector ``u`` of series by ``y d/dy u = A u`` and
``q d/dq u = B u``.  Integrability is the zero-curvature identity
``(y d/dy) B - (q d/dq) A + [A, B] = 0``; it forces the characteristic
polynomial of ``B_0`` (the ``q^0`` part of ``B``) to be independent of ``y``,
and the roots of that polynomial are the Frobenius exponents.

All verifiers report rather than assert: the first nonzero coefficient of a
residual is pinpointed, together with the window on which the computation is
guaranteed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations

from .errors import ParameterError, WindowError
from .series import (
    Direction,
    SeriesBox,
    _effectively_closed,
    coefficient,
    deriv_q,
    deriv_y,
    one,
    truncate,
    zero,
)
from .special import eisenstein_E, q_k


@dataclass
class MLDESystem:
    A: list
    B: list
    basis_labels: list
    provenance: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.A)

    def __post_init__(self):
        r = len(self.A)
        if any(len(row) != r for row in self.A) or len(self.B) != r or any(len(row) != r for row in self.B):
            raise ParameterError("A and B must be square matrices of equal size")


@dataclass
class ScalarMLDE:
    """``sum_j coeffs[j] (y d/dy)^(order - j) u = 0``; ``coeffs[0]`` is the unit."""

    order: int
    coeffs: list
    provenance: dict = field(default_factory=dict)


@dataclass
class UnrootedPoly:
    """Monic characteristic polynomial whose roots are not all rational."""

    coeffs: list  # highest degree first


@dataclass
class FrobeniusReport:
    char_poly_coeffs: list  # monic, highest degree first, rationals
    exponents: list | UnrootedPoly
    y_dependence_residual: Fraction
    first_y_dependent: dict | None
    window: dict
    coefficient_series: list = field(default_factory=list, repr=False)

    @property
    def y_independent(self) -> bool:
        return self.y_dependence_residual == 0

    def to_dict(self) -> dict:
        ex = self.exponents
        return {
            "char_poly_coeffs": [str(c) for c in self.char_poly_coeffs],
            "exponents": [str(e) for e in ex] if isinstance(ex, list) else {"unrooted": [str(c) for c in ex.coeffs]},
            "y_dependence_residual": str(self.y_dependence_residual),
            "first_nonzero": self.first_y_dependent,
            "window": self.window,
        }


# -- matrix helpers -------------------------------------------------------------------


def _matmul(X, Y):
    r = len(X)
    out = []
    for i in range(r):
        row = []
        for j in range(r):
            acc = None
            for k in range(r):
                t = X[i][k] * Y[k][j]
                acc = t if acc is None else acc + t
            row.append(acc)
        out.append(row)
    return out


def _mat_apply(M, f):
    return [[f(x) for x in row] for row in M]


def _pad_window(y_window, q_max, depth):
    lo, hi = Fraction(y_window[0]), Fraction(y_window[1])
    k = Fraction(math.ceil(q_max)) * depth
    return (lo - k, hi + k)


class _Ring:
    """Cached generators ``Q_k`` and ``E_2`` on one padded box."""

    def __init__(self, q_order, y_window, depth, direction):
        self.q_order = Fraction(q_order)
        self.direction = direction
        self.window = _pad_window(y_window, self.q_order + 1, depth)
        self._q = {}
        self.E2 = eisenstein_E(2, q_order)

    def Q(self, k):
        if k not in self._q:
            self._q[k] = q_k(k, self.q_order, self.window, self.direction)
        return self._q[k]


# -- builders ------------------------------------------------------------------------------


def build_level1_system(q_order=10, y_window=(-8, 8), direction: Direction = Direction.POS_Y) -> MLDESystem:
    """The printed 2x2 level-1 system in the basis ``(|0>, h)``."""
    R = _Ring(q_order, y_window, 7, direction)
    Q1, Q2, Q3, E2 = R.Q(1), R.Q(2), R.Q(3), R.E2
    Q11 = Q1 * Q1
    A = [
        [zero(None, (0, 0), direction), one(None, direction)],
        [(4 * Q2 - 4 * Q11 - E2) * Fraction(1, 16), Q1],
    ]
    B = [
        [(12 * Q2 - 12 * Q11 - E2) * Fraction(1, 48), -Q1],
        [(4 * Q11 * Q1 - 12 * Q1 * Q2 + 8 * Q3 - E2 * Q1) * Fraction(1, 16),
         (36 * Q11 - 36 * Q2 + E2) * Fraction(1, 48)],
    ]
    prov = {"system": "level1", "q_order": str(q_order), "y_window": [str(y_window[0]), str(y_window[1])],
            "direction": direction.value}
    return MLDESystem(A, B, ["|0>", "h"], prov)


def build_level1_system_rederived(q_order=10, y_window=(-8, 8), direction: Direction = Direction.POS_Y) -> MLDESystem:
    """Level-1 system rederived from the lattice characters.

    With ``S_1 = y d/dy S_0`` the lattice characters satisfy the heat equation
    ``q d/dq chi = (y d/dy)^2 chi - (E_2/24) chi``; combining it with the scalar
    MLDE they actually satisfy fixes both matrices.  Relative to the printed
    system three signs differ: the ``E_2`` term of ``A[1][0]`` and of
    ``B[0][0]``, and the sign of ``A[1][1]``.  The second row of ``B`` is
    unchanged.
    """
    R = _Ring(q_order, y_window, 7, direction)
    Q1, Q2, Q3, E2 = R.Q(1), R.Q(2), R.Q(3), R.E2
    Q11 = Q1 * Q1
    A = [
        [zero(None, (0, 0), direction), one(None, direction)],
        [(4 * Q2 - 4 * Q11 + E2) * Fraction(1, 16), -Q1],
    ]
    B = [
        [(12 * Q2 - 12 * Q11 + E2) * Fraction(1, 48), -Q1],
        [(4 * Q11 * Q1 - 12 * Q1 * Q2 + 8 * Q3 - E2 * Q1) * Fraction(1, 16),
         (36 * Q11 - 36 * Q2 + E2) * Fraction(1, 48)],
    ]
    prov = {"system": "level1-rederived", "q_order": str(q_order),
            "y_window": [str(y_window[0]), str(y_window[1])], "direction": direction.value}
    return MLDESystem(A, B, ["|0>", "h"], prov)


def _scalar_prov(name, q_order, y_window, direction, variant=None):
    d = {"mlde": name, "q_order": str(q_order), "y_window": [str(y_window[0]), str(y_window[1])],
         "direction": direction.value}
    if variant:
        d["variant"] = variant
    return d


def build_level1_scalar(q_order=12, y_window=(-12, 12), direction: Direction = Direction.POS_Y,
                        q1_sign: int = 1, e2_sign: int = 1) -> ScalarMLDE:
    """``(y d/dy)^2 - Q1 (y d/dy) - (Q2/4 - Q1^2/4 - E2/16)`` as printed.

    ``q1_sign``/``e2_sign`` flip the sign of the ``Q1`` and ``E2`` terms; they
    exist for localising normalisation slips and default to the printed form.
    """
    R = _Ring(q_order, y_window, 4, direction)
    Q1, Q2, E2 = R.Q(1), R.Q(2), R.E2
    c1 = -q1_sign * Q1
    c0 = -(Fraction(1, 4) * Q2 - Fraction(1, 4) * (Q1 * Q1) - e2_sign * Fraction(1, 16) * E2)
    variant = None if (q1_sign, e2_sign) == (1, 1) else {"q1_sign": q1_sign, "e2_sign": e2_sign}
    return ScalarMLDE(2, [one(None, direction), c1, c0],
                      _scalar_prov("level1", q_order, y_window, direction, variant))


def build_m43_scalar(q_order=12, y_window=(-12, 12), direction: Direction = Direction.NEG_Y) -> ScalarMLDE:
    """The printed third-order level -4/3 MLDE."""
    R = _Ring(q_order, y_window, 5, direction)
    Q1, Q2, Q3, E2 = R.Q(1), R.Q(2), R.Q(3), R.E2
    Q11 = Q1 * Q1
    c2 = -2 * Q1
    c1 = -(Fraction(10, 3) * Q2 - Fraction(4, 3) * Q11 + Fraction(1, 9) * E2)
    c0 = (Fraction(2, 27) * (E2 * Q1) - Fraction(52, 27) * Q3 + Fraction(20, 9) * (Q1 * Q2)
          - Fraction(8, 27) * (Q11 * Q1))
    return ScalarMLDE(3, [one(None, direction), c2, c1, c0],
                      _scalar_prov("m43", q_order, y_window, direction))


# -- application ---------------------------------------------------------------------------------


def apply_scalar(mlde: ScalarMLDE, u: SeriesBox) -> SeriesBox:
    """Residual ``sum_j coeffs[j] (y d/dy)^(n-j) u``."""
    n = mlde.order
    derivs = [u]
    for _ in range(n):
        derivs.append(deriv_y(derivs[-1]))
    acc = None
    for j, c in enumerate(mlde.coeffs):
        t = derivs[n - j] if j == 0 else c * derivs[n - j]
        acc = t if acc is None else acc + t
    return acc


def apply_system(sys: MLDESystem, which: str, u: list) -> list:
    """``(D - M) u`` with ``(D, M) = (y d/dy, A)`` for ``"Y"`` or ``(q d/dq, B)`` for ``"Q"``."""
    if which not in ("Y", "Q"):
        raise ParameterError("which must be 'Y' or 'Q'")
    M, D = (sys.A, deriv_y) if which == "Y" else (sys.B, deriv_q)
    if len(u) != sys.size:
        raise ParameterError("vector length does not match the system size")
    out = []
    for i in range(sys.size):
        acc = D(u[i])
        for k in range(sys.size):
            acc = acc - M[i][k] * u[k]
        out.append(acc)
    return out


def curvature(sys: MLDESystem, bracket_sign: int = 1) -> list:
    """``(y d/dy) B - (q d/dq) A + s [A, B]`` entrywise, ``s = bracket_sign``.

    ``s = +1`` is the identity as displayed.  For column vectors with
    ``y d/dy u = A u`` and ``q d/dq u = B u`` equality of mixed partials gives
    ``s = -1``; both are exposed so a report can say which one holds.
    """
    if bracket_sign not in (1, -1):
        raise ParameterError("bracket_sign must be +1 or -1")
    AB = _matmul(sys.A, sys.B)
    BA = _matmul(sys.B, sys.A)
    r = sys.size
    out = []
    for i in range(r):
        row = []
        for j in range(r):
            br = AB[i][j] - BA[i][j]
            e = deriv_y(sys.B[i][j]) - deriv_q(sys.A[i][j])
            row.append(e + br if bracket_sign > 0 else e - br)
        out.append(row)
    return out


# -- reporting ---------------------------------------------------------------------------------------


def _guaranteed(s: SeriesBox, q_bound, y_window):
    """Clip a requested comparison box to what ``s`` guarantees."""
    lo, hi = Fraction(y_window[0]), Fraction(y_window[1])
    clo, chi = _effectively_closed(s)
    if not clo:
        lo = max(lo, s.y_lo)
    if not chi:
        hi = min(hi, s.y_hi)
    qb = Fraction(q_bound)
    if s.q_max is not None:
        qb = min(qb, s.q_max)
    return qb, lo, hi


def first_nonzero(s: SeriesBox, q_bound, y_window):
    """First nonzero coefficient of ``s`` in canonical order on the clipped box."""
    qb, lo, hi = _guaranteed(s, q_bound, y_window)
    for q, y, c in s.terms():
        if q < qb and lo <= y <= hi:
            return {"q": str(q), "y": str(y), "value": str(c)}, (qb, lo, hi)
    return None, (qb, lo, hi)


def _window_dict(box):
    qb, lo, hi = box
    return {"q_max": str(qb), "y_window": [str(lo), str(hi)]}


def residual_report(s: SeriesBox, q_bound, y_window) -> dict:
    fn, box = first_nonzero(s, q_bound, y_window)
    lo, hi = Fraction(y_window[0]), Fraction(y_window[1])
    full = box[0] >= Fraction(q_bound) and box[1] <= lo and box[2] >= hi
    return {"zero": fn is None, "first_nonzero": fn, "window": _window_dict(box), "covers_request": full}


def scalar_residual_report(builder, u: SeriesBox, q_order, y_window, direction=None, **kw) -> dict:
    """Apply the MLDE from ``builder`` to ``u`` and pinpoint the residual on ``q <= q_order``."""
    if direction is None:
        direction = Direction.POS_Y if u.neutral else u.direction
    # one extra order in the coefficients so the residual reaches q_order itself
    mlde = builder(Fraction(q_order) + 1, y_window, direction, **kw)
    res = apply_scalar(mlde, u)
    rep = residual_report(res, Fraction(q_order) + 1, y_window)
    rep["mlde"] = mlde.provenance
    return rep


def curvature_report(sys: MLDESystem, q_bound, y_window, bracket_sign: int = 1) -> dict:
    F = curvature(sys, bracket_sign)
    entries = []
    verdict = True
    first = None
    for i, row in enumerate(F):
        for j, s in enumerate(row):
            rep = residual_report(s, q_bound, y_window)
            rep["entry"] = [i, j]
            entries.append(rep)
            verdict = verdict and rep["zero"] and rep["covers_request"]
            if first is None and rep["first_nonzero"] is not None:
                first = dict(rep["first_nonzero"], entry=[i, j])
    return {"zero": verdict, "first_nonzero": first, "entries": entries,
            "window": {"q_max": str(q_bound), "y_window": [str(y_window[0]), str(y_window[1])]},
            "system": sys.provenance, "bracket_sign": bracket_sign}


# -- isospectrality and Frobenius exponents ---------------------------------------------------------------


def _q0_part(s: SeriesBox) -> SeriesBox:
    step = Fraction(1, s.q_den)
    return truncate(s, q_max=step)


def _det(M):
    r = len(M)
    acc = None
    for perm in permutations(range(r)):
        sgn = 1
        for a in range(r):
            for b in range(a + 1, r):
                if perm[a] > perm[b]:
                    sgn = -sgn
        t = None
        for i in range(r):
            t = M[i][perm[i]] if t is None else t * M[i][perm[i]]
        t = t if sgn > 0 else -t
        acc = t if acc is None else acc + t
    return acc


def char_poly_series(M: list) -> list:
    """Coefficients ``[1, c_1, ..., c_r]`` of ``det(lambda I - M)`` as series.

    Uses ``c_k = (-1)^k e_k`` where ``e_k`` sums the principal ``k``-minors.
    """
    from itertools import combinations

    r = len(M)
    out = [None] * (r + 1)
    for k in range(1, r + 1):
        acc = None
        for idx in combinations(range(r), k):
            t = _det([[M[i][j] for j in idx] for i in idx])
            acc = t if acc is None else acc + t
        out[k] = acc if k % 2 == 0 else -acc
    return out


def isospectrality_check(sys: MLDESystem, y_window=(-8, 8)) -> FrobeniusReport:
    """Characteristic polynomial of ``B_0(y)`` and its ``y``-dependence on the window."""
    B0 = _mat_apply(sys.B, _q0_part)
    cp = char_poly_series(B0)
    lo, hi = Fraction(y_window[0]), Fraction(y_window[1])
    consts = [Fraction(1)]
    worst = Fraction(0)
    first = None
    box = None
    for k in range(1, len(cp)):
        s = cp[k]
        qb, clo, chi = _guaranteed(s, Fraction(1, s.q_den), (lo, hi))
        if clo > lo or chi < hi:
            raise WindowError(f"char-poly coefficient {k} is not guaranteed on [{lo}, {hi}]")
        if not (clo <= 0 <= chi):
            raise WindowError("y^0 lies outside the guaranteed window")
        box = (qb, clo, chi)
        consts.append(coefficient(s, 0, 0))
        for q, y, c in s.terms():
            if q < qb and y != 0 and lo <= y <= hi:
                if abs(c) > worst:
                    worst = abs(c)
                if first is None:
                    first = {"coeff_index": k, "q": str(q), "y": str(y), "value": str(c)}
    ex = _rational_roots(consts)
    return FrobeniusReport(consts, ex, worst, first,
                           {"q_max": str(box[0]) if box else None, "y_window": [str(lo), str(hi)]}, cp)


def _rational_roots(coeffs: list):
    """All roots of the monic rational polynomial if they are rational, else ``UnrootedPoly``."""
    coeffs = [Fraction(c) for c in coeffs]
    roots = []
    poly = coeffs[:]
    while len(poly) > 1:
        if poly[-1] == 0:
            roots.append(Fraction(0))
            poly = poly[:-1]
            continue
        den = 1
        for c in poly:
            den = den * c.denominator // math.gcd(den, c.denominator)
        ints = [int(c * den) for c in poly]
        lead, tail = abs(ints[0]), abs(ints[-1])
        found = None
        for p in _divisors(tail):
            for qd in _divisors(lead):
                for cand in (Fraction(p, qd), Fraction(-p, qd)):
                    if _horner(poly, cand) == 0:
                        found = cand
                        break
                if found is not None:
                    break
            if found is not None:
                break
        if found is None:
            return UnrootedPoly(coeffs)
        roots.append(found)
        poly = _deflate(poly, found)
    return sorted(roots)


def _divisors(n: int) -> list[int]:
    n = abs(n)
    return [d for d in range(1, n + 1) if n % d == 0] if n else [1]


def _horner(poly, x):
    v = Fraction(0)
    for c in poly:
        v = v * x + c
    return v


def _deflate(poly, r):
    out = [poly[0]]
    for c in poly[1:-1]:
        out.append(c + out[-1] * r)
    return out


def frobenius_exponents(sys: MLDESystem, y_window=(-8, 8)):
    """Eigenvalues of ``B_0``: rational roots of the ``y``-independent char poly."""
    rep = isospectrality_check(sys, y_window)
    if not rep.y_independent:
        raise WindowError("characteristic polynomial of B_0 depends on y; exponents undefined")
    return rep.exponents


def exponent_offsets(exponents, leading) -> list | None:
    """Pairwise offsets ``exponent - leading`` after sorting both lists."""
    if not isinstance(exponents, list) or len(exponents) != len(leading):
        return None
    return [e - l for e, l in zip(sorted(exponents), sorted(leading))]


# -- scalar from system ------------------------------------------------------------------------------------


def eliminate_to_scalar(sys: MLDESystem) -> ScalarMLDE:
    """Scalar MLDE for ``S_0`` from a companion-form ``y``-system.

    Requires ``A[j] = e_{j+1}`` for ``j < r-1`` so that ``S_{j+1} = (y d/dy) S_j``;
    the last row then gives ``(y d/dy)^r S_0 = sum_j A[r-1][j] (y d/dy)^j S_0``.
    """
    r = sys.size
    for j in range(r - 1):
        for k in range(r):
            want = 1 if k == j + 1 else 0
            e = sys.A[j][k]
            terms = e.terms()
            ok = (not terms and want == 0) or (
                len(terms) == 1 and terms[0][0] == 0 and terms[0][1] == 0 and terms[0][2] == want
            )
            if not ok:
                raise ParameterError("y-system is not in companion form; elimination S_{j+1} = y d/dy S_j fails")
    last = sys.A[r - 1]
    coeffs = [one(None, last[0].direction)] + [-last[j] for j in range(r - 1, -1, -1)]
    return ScalarMLDE(r, coeffs, {"derived_from": sys.provenance})


def compare_scalar(a: ScalarMLDE, b: ScalarMLDE, q_bound, y_window) -> dict:
    """Coefficient-series comparison of two scalar MLDEs on a window."""
    if a.order != b.order:
        return {"equal": False, "reason": "orders differ"}
    diffs = []
    for j, (x, y) in enumerate(zip(a.coeffs, b.coeffs)):
        rep = residual_report(x - y, q_bound, y_window)
        rep["coefficient"] = f"(y d/dy)^{a.order - j}"
        diffs.append(rep)
    return {"equal": all(d["zero"] and d["covers_request"] for d in diffs), "coefficients": diffs}

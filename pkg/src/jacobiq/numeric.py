"""Complex evaluation of truncated series and numerical checks of analytic identities.

Points are given as ``(alpha, tau)`` with ``y = e^{2 pi i alpha}`` and
``q = e^{2 pi i tau}``; fractional powers are always taken through the
exponent, ``y^e = e^{2 pi i e alpha}``, so that branch choices are consistent
between a point and its translates.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations

import numpy as np

from .errors import ConditioningError, DomainError, LatticeError, NearSingular, SearchError
from .series import SeriesBox, _effectively_closed
from .special import bernoulli, weierstrass_wp

TWO_PI_I = 2j * math.pi


@dataclass
class NumericContext:
    alpha: complex
    tau: complex
    N: int = 1
    q_order: int = 40
    y_window: tuple = (-12, 12)
    tol: float = 1e-8
    tail_estimate: float = 0.0

    def __post_init__(self):
        self.alpha = complex(self.alpha)
        self.tau = complex(self.tau)
        if self.tau.imag <= 0:
            raise DomainError("tau must lie in the upper half plane")

    @property
    def y(self) -> complex:
        return cmath.exp(TWO_PI_I * self.alpha)

    @property
    def q(self) -> complex:
        return cmath.exp(TWO_PI_I * self.tau)

    @property
    def in_domain(self) -> bool:
        return domain_check(self.alpha, self.tau, self.N)


@dataclass
class TransformCheck:
    law: str
    lhs: object
    rhs: object
    residual: float
    tol: float
    inputs: dict = field(default_factory=dict)
    matched_permutation_and_factor: dict | None = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.residual < self.tol)

    def to_dict(self) -> dict:
        def enc(v):
            if isinstance(v, (complex, np.complexfloating)):
                return [float(v.real), float(v.imag)]
            if isinstance(v, (list, tuple, np.ndarray)):
                return [enc(x) for x in v]
            if isinstance(v, (float, np.floating)):
                return float(v)
            return v

        return {
            "law": self.law,
            "inputs": {k: enc(v) for k, v in self.inputs.items()},
            "lhs": enc(self.lhs),
            "rhs": enc(self.rhs),
            "residual": float(self.residual),
            "tol": self.tol,
            "passed": self.passed,
            "match": self.matched_permutation_and_factor,
            "details": {k: enc(v) for k, v in self.details.items()},
        }


# -- series evaluation ---------------------------------------------------------------


def _arrays(s: SeriesBox):
    qs, ys, cs = [], [], []
    for (nq, ny), c in s.raw_terms().items():
        qs.append(nq / s.q_den)
        ys.append(ny / s.y_den)
        cs.append(float(c))
    return np.array(qs), np.array(ys), np.array(cs, dtype=complex)


def eval_series(s: SeriesBox, alpha, tau, with_tail: bool = False):
    """Sum of the stored terms at ``(alpha, tau)``; optionally the last-slice magnitude.

    Raises :class:`DomainError` when ``|y|`` lies on the divergent side of 1
    for a series whose slices are unbounded in that direction.
    """
    alpha, tau = complex(alpha), complex(tau)
    if tau.imag <= 0:
        raise DomainError("tau must lie in the upper half plane")
    clo, chi = _effectively_closed(s)
    if not chi and s.upper is None and alpha.imag <= 0:
        raise DomainError("series is unbounded in positive y-powers; needs Im(alpha) > 0 (|y| < 1)")
    if not clo and s.lower is None and alpha.imag >= 0:
        raise DomainError("series is unbounded in negative y-powers; needs Im(alpha) < 0 (|y| > 1)")
    if not s.raw_terms():
        return (0j, 0.0) if with_tail else 0j
    qs, ys, cs = _arrays(s)
    vals = cs * np.exp(TWO_PI_I * (ys * alpha + qs * tau))
    total = complex(vals.sum())
    if not with_tail:
        return total
    top = qs.max()
    tail = float(abs(vals[qs == top].sum()))
    return total, tail


# -- domain and SL2(Z) ------------------------------------------------------------------------


def domain_check(alpha, tau, N: int = 1) -> bool:
    """``0 < -N Im(alpha) < Im(tau)``."""
    alpha, tau = complex(alpha), complex(tau)
    return 0 < -N * alpha.imag < tau.imag


def act_sl2(M, alpha, tau):
    """``(alpha, tau) -> (alpha/(c tau + d), (a tau + b)/(c tau + d))``."""
    (a, b), (c, d) = M
    j = c * tau + d
    return alpha / j, (a * tau + b) / j


def _egcd(a: int, b: int):
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y


def lattice_coordinates(alpha, tau):
    """Real ``(u, v)`` with ``alpha = u + v tau``."""
    alpha, tau = complex(alpha), complex(tau)
    v = alpha.imag / tau.imag
    return alpha.real - v * tau.real, v


def find_sl2_to_domain(alpha, tau, N: int = 1, search_bound: int = 200, tol: float = 1e-12):
    """Integer matrix ``[[a, b], [c, d]]`` of determinant 1 moving ``(alpha, tau)`` into the domain.

    Writing ``alpha = u + v tau``, the image satisfies ``-N Im(alpha')/Im(tau')
    = N (c u - d v)``, so it suffices to find coprime ``(c, d)`` with
    ``c u - d v`` in ``(0, 1/N)``.  Pairs are tried in order of increasing
    ``max(|c|, |d|)``.
    """
    alpha, tau = complex(alpha), complex(tau)
    if tau.imag <= 0:
        raise DomainError("tau must lie in the upper half plane")
    u, v = lattice_coordinates(alpha, tau)
    if abs(N * u - round(N * u)) < tol and abs(N * v - round(N * v)) < tol:
        raise LatticeError(f"N*alpha lies on the lattice Z + Z tau (u={u}, v={v})")
    if domain_check(alpha, tau, N):
        return [[1, 0], [0, 1]]
    best = None
    for r in range(1, search_bound + 1):
        for c in range(-r, r + 1):
            for d in ((-r, r) if abs(c) != r else range(-r, r + 1)):
                if math.gcd(c, d) != 1:
                    continue
                t = c * u - d * v
                if 0 < N * t < 1:
                    margin = min(N * t, 1 - N * t)
                    if best is None or margin > best[0] + 1e-9:
                        best = (margin, c, d)
        if best is not None and best[0] > 1e-6:
            break
    if best is None:
        raise SearchError(f"no coprime (c, d) with |c|, |d| <= {search_bound} found; raise search_bound")
    _, c, d = best
    g, x, y = _egcd(d, -c)
    # x d - y c = 1  -> a = x, b = y
    M = [[x, y], [c, d]]
    if M[0][0] * d - M[0][1] * c != 1:
        raise SearchError("failed to complete (c, d) to a unimodular matrix")
    a2, t2 = act_sl2(M, alpha, tau)
    if not domain_check(a2, t2, N):
        raise SearchError("image missed the domain (numerical edge case)")
    return M


# -- theta, eta, psi ------------------------------------------------------------------------------


def theta(z, tau, order: int = 40) -> complex:
    """``theta_11(z, tau) = i sum (-1)^n q^{(n+1/2)^2/2} e^{2 pi i (n+1/2) z}``."""
    n = np.arange(-order, order + 1)
    m = n + 0.5
    terms = (-1.0) ** n * np.exp(TWO_PI_I * (m * m / 2 * complex(tau) + m * complex(z)))
    return complex(1j * terms.sum())


def theta_prime0(tau, order: int = 40) -> complex:
    n = np.arange(-order, order + 1)
    m = n + 0.5
    terms = (-1.0) ** n * m * np.exp(TWO_PI_I * (m * m / 2 * complex(tau)))
    return complex(1j * TWO_PI_I * terms.sum())


def eta_numeric(tau, order: int = 40) -> complex:
    q = cmath.exp(TWO_PI_I * tau)
    p = cmath.exp(TWO_PI_I * tau / 24)
    for n in range(1, order + 1):
        p *= 1 - q**n
    return p


def psi(z, alpha, tau, order: int = 40, tol: float = 1e-14) -> complex:
    """``theta'(0) theta(z+alpha) / (theta(z) theta(alpha))``."""
    tz, ta = theta(z, tau, order), theta(alpha, tau, order)
    scale = max(1.0, abs(theta(0.25 + 0.1j * complex(tau).imag, tau, order)))
    if abs(tz) < tol * scale or abs(ta) < tol * scale:
        raise NearSingular("theta vanishes at the input (lattice point)")
    return theta_prime0(tau, order) * theta(z + alpha, tau, order) / (tz * ta)


def check_theta_quasiperiodicity(z, tau, order: int = 40, tol: float = 1e-8) -> TransformCheck:
    z, tau = complex(z), complex(tau)
    t0 = theta(z, tau, order)
    scale = max(abs(t0), 1e-300)
    if abs(t0) < 1e-14:
        raise NearSingular("theta vanishes at z")
    r1 = abs(theta(z + 1, tau, order) + t0) / scale
    pred = -cmath.exp(-TWO_PI_I * tau / 2) * cmath.exp(-TWO_PI_I * z) * t0
    lhs = theta(z + tau, tau, order)
    r2 = abs(lhs - pred) / max(abs(pred), 1e-300)
    return TransformCheck("theta-shift", [theta(z + 1, tau, order), lhs], [-t0, pred], max(r1, r2), tol,
                          {"z": z, "tau": tau, "order": order}, details={"z+1": r1, "z+tau": r2})


def check_psi(z, alpha, tau, order: int = 40, tol: float = 1e-8) -> TransformCheck:
    z, alpha, tau = complex(z), complex(alpha), complex(tau)
    p0 = psi(z, alpha, tau, order)
    p1 = psi(z + 1, alpha, tau, order)
    pt = psi(z + tau, alpha, tau, order)
    pred = cmath.exp(-TWO_PI_I * alpha) * p0
    r1 = abs(p1 - p0) / abs(p0)
    r2 = abs(pt - pred) / abs(pred)
    return TransformCheck("psi-shift", [p1, pt], [p0, pred], max(r1, r2), tol,
                          {"z": z, "alpha": alpha, "tau": tau, "order": order}, details={"z+1": r1, "z+tau": r2})


# -- Fourier sums -------------------------------------------------------------------------------------


def _terms_needed(ratio: float, order: int, eps: float = 1e-18) -> int:
    """Number of terms of a geometric-type sum with ratio ``ratio`` before it drops below ``eps``."""
    if ratio <= 0:
        return order
    if ratio >= 1:
        raise DomainError("Fourier sum does not converge at this point")
    return max(order, int(math.ceil(math.log(eps) / math.log(ratio))) + 8)


def p1_three_variable(z, alpha, tau, sign: str = "+", order: int = 40) -> complex:
    """Direct sum of ``P_1^sign(z, y, q)`` with ``y = e^{2 pi i alpha}``."""
    y = cmath.exp(TWO_PI_I * complex(alpha))
    q = cmath.exp(TWO_PI_I * complex(tau))
    if sign == "+":
        if not abs(q) < abs(1 / y) < 1:
            raise DomainError("P_1^+ needs |q| < |y^-1| < 1")
        const = sum(y ** (-n) for n in range(0, _terms_needed(abs(1 / y), order)))
    elif sign == "-":
        if not abs(q) < abs(y) < 1:
            raise DomainError("P_1^- needs |q| < |y| < 1")
        const = -sum(y**n for n in range(1, _terms_needed(abs(y), order)))
    else:
        raise ValueError("sign must be '+' or '-'")
    ew = cmath.exp(TWO_PI_I * complex(z))
    s = const - ew / (ew - 1)
    ratio = max(abs(q / y * ew), abs(q * y / ew))
    for n in range(1, _terms_needed(ratio, order) + 1):
        qn = q**n
        s += (qn / y) / (1 - qn / y) * ew**n - (y * qn) / (1 - y * qn) * ew ** (-n)
    return s


def p_plus_numeric(k: int, z, tau, order: int = 40) -> complex:
    """``P_k^+(e^{2 pi i z}, q)`` by its Fourier sum, prefactor included."""
    w = cmath.exp(TWO_PI_I * complex(z))
    q = cmath.exp(TWO_PI_I * complex(tau))
    if not abs(q) < abs(w) < 1:
        raise DomainError("P_k^+ needs |q| < |e^{2 pi i z}| < 1")
    s = 0j
    for n in range(1, _terms_needed(max(abs(w), abs(q / w)), order + 4 * k) + 1):
        qn = q**n
        s += n ** (k - 1) * (w**n + (-1) ** k * w ** (-n) * qn) / (1 - qn)
    return TWO_PI_I**k / math.factorial(k - 1) * s


def wp_numeric(k: int, z, tau, z_order: int = 80, q_order: int = 40) -> complex:
    """``wp_k(z, tau)`` from its Laurent expansion at ``z = 0``."""
    z, tau = complex(z), complex(tau)
    if abs(z) >= min(1.0, abs(tau), abs(tau - 1), abs(tau + 1)):
        raise DomainError("z lies outside the disc of convergence of the Laurent series")
    L = weierstrass_wp(k, z_order, q_order)
    w = TWO_PI_I * z
    total = 0j
    for e in L.exponents():
        total += eval_series(L[e], 0, tau) * w**e
    return TWO_PI_I**L.two_pi_i_pow * total


def check_psi_equals_P1(z, alpha, tau, sign: str = "+", order: int = 40, tol: float = 1e-8) -> TransformCheck:
    """``psi(z; -alpha, tau) = -2 pi i P_1^sign(z; e^{2 pi i alpha}, q)``."""
    z, alpha, tau = complex(z), complex(alpha), complex(tau)
    rhs = -TWO_PI_I * p1_three_variable(z, alpha, tau, sign, order)
    lhs = psi(z, -alpha, tau, order)
    res = abs(lhs - rhs) / max(abs(lhs), 1e-300)
    return TransformCheck("psi-p1", lhs, rhs, res, tol, {"z": z, "alpha": alpha, "tau": tau, "sign": sign, "order": order})


def check_wp_equals_P(k: int, z, tau, order: int = 40, tol: float = 1e-8, z_order: int = 80) -> TransformCheck:
    """``P_k^+(e^{2 pi i z}, q) = (-1)^k wp_k(z, tau)``."""
    z, tau = complex(z), complex(tau)
    lhs = p_plus_numeric(k, z, tau, order)
    rhs = (-1) ** k * wp_numeric(k, z, tau, z_order, order)
    res = abs(lhs - rhs) / max(abs(lhs), 1e-300)
    return TransformCheck("wp-p", lhs, rhs, res, tol, {"k": k, "z": z, "tau": tau, "order": order})


def twisted_E_numeric(m: int, alpha, tau, radius: float = 0.05, points: int = 256, order: int = 40) -> complex:
    """``E_m(y, q)`` as a Laurent coefficient of ``psi(z; -alpha, tau)/(-2 pi i)`` by a contour integral."""
    zs = radius * np.exp(2j * math.pi * np.arange(points) / points)
    vals = np.array([psi(complex(z), -complex(alpha), tau, order) for z in zs]) / (-TWO_PI_I)
    # coefficient of z^(m-1), then divide by (2 pi i)^(m-1)
    c = np.mean(vals * zs ** (-(m - 1)))
    return complex(c / TWO_PI_I ** (m - 1))


# -- families: elliptic and modular laws --------------------------------------------------------------


def _lattice_numeric(shift, a, b, alternating, alpha, tau, order=40):
    n = np.arange(-order, order + 1)
    m = n + shift
    sgn = (-1.0) ** n if alternating else np.ones_like(m)
    return complex((sgn * np.exp(TWO_PI_I * (a * m * m * tau + b * m * alpha))).sum())


def level1_closed_form(i: int, alpha, tau, order: int = 40) -> complex:
    """``eta^-1 sum_{m in Z + i/2} y^m q^{m^2}`` evaluated directly."""
    return _lattice_numeric(i / 2, 1.0, 1.0, False, complex(alpha), complex(tau), order) / eta_numeric(tau, order)


def m43_closed_form(i: int, alpha, tau, order: int = 40) -> complex:
    """``theta_i(y, q^3) / theta_0(y, q)`` evaluated directly."""
    alpha, tau = complex(alpha), complex(tau)
    num = _lattice_numeric(0.5 - i / 3, 1.5, 1.0, True, alpha, tau, order)
    den = _lattice_numeric(0.5, 0.5, 1.0, True, alpha, tau, order)
    if abs(den) < 1e-14:
        raise NearSingular("theta_0 vanishes at alpha")
    return num / den


def _family_closed_form(family):
    return level1_closed_form if family.label.startswith("L_1") else m43_closed_form


def family_values(family, alpha, tau, route: str = "auto", order: int = 40) -> np.ndarray:
    """Member values at a point, by series evaluation or by the closed-form quotients."""
    alpha, tau = complex(alpha), complex(tau)
    if route == "series" or (route == "auto" and all(s.neutral for s in family.series())):
        return np.array([eval_series(s, alpha, tau) for s in family.series()])
    f = _family_closed_form(family)
    return np.array([f(i, alpha, tau, order) for i in range(len(family.members))])


def _best_match(lhs, base, factor):
    """Best permutation with fitted unit-modulus phases: ``lhs_i ~ phase_i * factor * base_sigma(i)``.

    One phase per member: reindexing a theta sum by a shift of its
    characteristic moves the sign ``(-1)^n`` and the root of unity from
    ``y^{1/2}`` independently on each member.
    """
    best = None
    scale = max(np.max(np.abs(lhs)), 1e-300)
    for perm in permutations(range(len(base))):
        rhs = factor * base[list(perm)]
        ph = np.array([v / abs(v) if abs(v) > 0 else 1.0 for v in lhs * np.conj(rhs)])
        res = float(np.max(np.abs(lhs - ph * rhs)) / scale)
        if best is None or res < best[0]:
            best = (res, perm, ph, rhs * ph)
    return best


def check_elliptic_shift(family, m: int, n: int, alpha, tau, kappa=None, tol: float = 1e-8,
                         route: str = "auto", order: int = 40) -> TransformCheck:
    """``chi(alpha + m tau + n) = e^{-2 pi i kappa (m^2 tau + 2 m alpha)} * phase * chi_sigma(alpha)``."""
    alpha, tau = complex(alpha), complex(tau)
    kappa = family.index if kappa is None else kappa
    kf = float(Fraction(kappa))
    shifted = alpha + m * tau + n
    lhs = family_values(family, shifted, tau, route, order)
    base = family_values(family, alpha, tau, route, order)
    factor = cmath.exp(-TWO_PI_I * kf * (m * m * tau + 2 * m * alpha))
    res, perm, phases, rhs = _best_match(lhs, base, factor)
    match = {
        "permutation": list(perm),
        "phases": [[float(p.real), float(p.imag)] for p in phases],
        "factor": [factor.real, factor.imag],
        "kappa": str(kappa),
    }
    return TransformCheck(
        "elliptic", list(lhs), list(rhs), res, tol,
        {"family": family.label, "m": m, "n": n, "alpha": alpha, "tau": tau, "kappa": str(kappa), "route": route},
        matched_permutation_and_factor=match,
    )


def fit_kappa(family, alpha, tau, candidates=None, route: str = "auto") -> dict:
    """Residual of the ``m = 1`` elliptic law for each candidate index."""
    if candidates is None:
        candidates = [Fraction(k, 12) for k in range(-12, 13)]
    out = {}
    for k in candidates:
        out[str(k)] = check_elliptic_shift(family, 1, 0, alpha, tau, k, route=route).residual
    return out


def check_modular_span(family, A, alpha_samples, tau, kappa=None, tol: float = 1e-8,
                       order: int = 40, cond_max: float = 1e10) -> TransformCheck:
    """Least-squares fit of ``chi(A.(alpha, tau)) e^{-2 pi i kappa c alpha^2/(c tau + d)} = M chi(alpha, tau)``."""
    (a, b), (c, d) = A
    tau = complex(tau)
    kf = float(Fraction(family.index if kappa is None else kappa))
    f = _family_closed_form(family)
    r = len(family.members)
    X, Y = [], []
    j = c * tau + d
    for al in alpha_samples:
        al = complex(al)
        a2, t2 = al / j, (a * tau + b) / j
        X.append([f(i, al, tau, order) for i in range(r)])
        fac = cmath.exp(-TWO_PI_I * kf * c * al * al / j)
        Y.append([fac * f(i, a2, t2, order) for i in range(r)])
    X, Y = np.array(X), np.array(Y)
    cond = np.linalg.cond(X)
    if not np.isfinite(cond) or cond > cond_max:
        raise ConditioningError(f"sample matrix condition number {cond:.3g} is too large")
    Mt, *_ = np.linalg.lstsq(X, Y, rcond=None)
    M = Mt.T
    res = float(np.linalg.norm(X @ Mt - Y) / np.linalg.norm(Y))
    return TransformCheck("modular", None, None, res, tol,
                          {"family": family.label, "A": A, "tau": tau, "samples": len(alpha_samples)},
                          details={"matrix": M.tolist(), "condition": float(cond)})


def check_eta_modular(tau, order: int = 40, tol: float = 1e-10) -> TransformCheck:
    """``eta(-1/tau) = sqrt(-i tau) eta(tau)``."""
    tau = complex(tau)
    lhs = eta_numeric(-1 / tau, order)
    rhs = cmath.sqrt(-1j * tau) * eta_numeric(tau, order)
    return TransformCheck("modular", lhs, rhs, abs(lhs - rhs) / abs(rhs), tol, {"function": "eta", "tau": tau})


def eisenstein_numeric(k: int, tau, order: int = 40) -> complex:
    """Normalised ``E_k(tau) = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n``."""
    q = cmath.exp(TWO_PI_I * complex(tau))
    c = -2 * k / float(bernoulli(k))
    s = 0j
    for n in range(1, order + 1):
        s += n ** (k - 1) * q**n / (1 - q**n)
    return 1 + c * s


def check_eisenstein_modular(k: int, A, tau, order: int = 40, tol: float = 1e-8) -> TransformCheck:
    """``E_k(A tau) = (c tau + d)^k E_k(tau)`` for ``k >= 4``."""
    (a, b), (c, d) = A
    tau = complex(tau)
    t2 = (a * tau + b) / (c * tau + d)
    lhs = eisenstein_numeric(k, t2, order)
    rhs = (c * tau + d) ** k * eisenstein_numeric(k, tau, order)
    return TransformCheck("modular", lhs, rhs, abs(lhs - rhs) / abs(rhs), tol, {"function": f"E{k}", "A": A, "tau": tau})


def parse_point(text: str):
    """``"<alpha>,<tau>"`` with Python complex syntax (``0.2-0.4j`` or ``0.2-0.4i``)."""
    parts = text.replace("i", "j").split(",")
    if len(parts) != 2:
        raise ValueError("point must be '<alpha>,<tau>'")
    return complex(parts[0].strip()), complex(parts[1].strip())


def parse_complex(text: str) -> complex:
    return complex(text.strip().replace("i", "j"))

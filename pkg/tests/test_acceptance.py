"""The fourteen acceptance criteria, each at its stated tolerance and time limit."""

import io
import json
import random
import time
from contextlib import redirect_stdout
from fractions import Fraction as F

import pytest

from conftest import record
from jacobiq import numeric as nm
from jacobiq.characters import char_level1, char_level1_oracle, count_admissible_sl2, family_level1, family_m43
from jacobiq.cli import main
from jacobiq.mlde import build_level1_scalar, build_level1_system, compare_scalar, curvature_report
from jacobiq.mlde import eliminate_to_scalar, isospectrality_check
from jacobiq.series import coefficient, deriv_y, first_difference
from jacobiq.special import (
    bernoulli,
    eisenstein_E,
    eisenstein_G,
    eta_cubed_by_squaring,
    q_k,
    theta_derivative_series,
    twisted_E,
)

from _props import derivations_commute, eval_linear, invert_roundtrip, leibniz, rand_point, rand_series, ring_laws

TAU, ALPHA, Z = 0.1 + 2j, 0.2 - 0.4j, 0.3 + 0.2j


class Timer:
    def __enter__(self):
        self.t = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.s = time.perf_counter() - self.t


def test_c01_eisenstein_bedrock():
    with Timer() as t:
        e2 = [coefficient(eisenstein_E(2, 4), n, 0) for n in range(5)]
        consts = {k: coefficient(eisenstein_G(k, 2), 0, 0) for k in (2, 4, 6)}
    bern = {2: F(1, 6), 4: F(-1, 30), 6: F(1, 42)}
    fact = {2: 2, 4: 24, 6: 720}
    ok = e2 == [1, -24, -72, -96, -168] and all(consts[k] == -bern[k] / fact[k] for k in bern)
    ok = ok and all(bernoulli(k) == bern[k] for k in bern) and t.s < 1
    record(1, ok, f"E2 = {[str(c) for c in e2]}, G consts = {[str(v) for v in consts.values()]}", t.s)
    assert ok


def test_c02_derivative_ladder():
    with Timer() as t:
        Q = {k: q_k(k, 25, (-20, 20)) for k in range(1, 7)}
        diffs = [first_difference(deriv_y(Q[k]), Q[k + 1].scale(k), 26, (-20, 20)) for k in range(1, 6)]
    ok = all(d is None for d in diffs) and t.s < 10
    record(2, ok, "deriv_y Q_k = k Q_{k+1}, k = 1..5, q^25, y in [-20, 20]", t.s)
    assert ok


def test_c03_twisted_eisenstein_agreement():
    with Timer() as t:
        diffs = {m: first_difference(twisted_E(m, 30, (-12, 12), "+"), twisted_E(m, 30, (-12, 12), "-"), 31, (-12, 12))
                 for m in range(2, 9)}
    ok = all(d is None for d in diffs.values()) and t.s < 30
    record(3, ok, "E_m plus = minus, m = 2..8, q^30, y in [-12, 12]", t.s)
    assert ok


def test_c04_theta_eta_identity():
    with Timer() as t:
        d = first_difference(theta_derivative_series(50), eta_cubed_by_squaring(50), F(50) + F(1, 8), (0, 0))
    ok = d is None and t.s < 5
    record(4, ok, "sum (-1)^n (n+1/2) q^{(n+1/2)^2/2} = eta^3 to q^50", t.s)
    assert ok


@pytest.mark.xfail(strict=True, reason="the printed level-1 matrices are not flat; see the decisions ledger")
def test_c05_zero_curvature():
    with Timer() as t:
        rep = curvature_report(build_level1_system(10, (-8, 8)), 11, (-8, 8), bracket_sign=1)
        alt = curvature_report(build_level1_system(10, (-8, 8)), 11, (-8, 8), bracket_sign=-1)
    ok = rep["zero"] and t.s < 60
    record(5, ok, f"printed system, first nonzero {rep['first_nonzero']}; "
                  f"opposite bracket sign {'zero' if alt['zero'] else 'also nonzero'}", t.s)
    assert ok


def test_c06_isospectrality():
    with Timer() as t:
        rep = isospectrality_check(build_level1_system(2, (-8, 8)), (-8, 8))
    ok = rep.y_independent and t.s < 10
    record(6, ok, f"det(lambda - B0) coefficients {[str(c) for c in rep.char_poly_coeffs]}, "
                  f"exponents {[str(e) for e in rep.exponents]}", t.s)
    assert ok


def test_c07_scalar_system_consistency():
    with Timer() as t:
        W = (-12, 12)
        cmp = compare_scalar(eliminate_to_scalar(build_level1_system(12, W)), build_level1_scalar(12, W), 13, W)
    ok = cmp["equal"] and t.s < 10
    record(7, ok, "elimination of S_1 = y d/dy S_0 reproduces the printed scalar MLDE", t.s)
    assert ok


def test_c08_character_oracle():
    with Timer() as t:
        diffs = [first_difference(char_level1(i, 20, (-10, 10)), char_level1_oracle(i, 20, (-10, 10)), 21, (-10, 10))
                 for i in (0, 1)]
        lead = family_level1(2, (-4, 4)).leading_exponents
    ok = all(d is None for d in diffs) and lead == [F(-1, 24), F(5, 24)] and t.s < 20
    record(8, ok, f"char_level1 = oracle to q^20, leading {[str(x) for x in lead]}", t.s)
    assert ok


def _cli_json(*argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(list(argv) + ["--json"])
    return code, json.loads(buf.getvalue())


def test_c09_mlde_reporting():
    verdicts = []
    with Timer() as t:
        for fam in ("level1", "m43"):
            code, d = _cli_json("verify", "mlde", "--family", fam, "--member", "all", "--q-order", "12",
                                "--y-window", "-12..12")
            conv = d["convention"]
            certified = code == 0 and conv["matched"] and all(m["zero"] and m["covers_request"] for m in d["members"])
            pinpointed = code == 2 and d["first_nonzero"] is not None and conv["search_space"] and "candidates" in conv
            verdicts.append((fam, "certified" if certified else "pinpointed" if pinpointed else "NO VERDICT",
                             d["first_nonzero"]))
    ok = all(v[1] != "NO VERDICT" for v in verdicts) and t.s < 120
    record(9, ok, "; ".join(f"{f}: {v}" + (f" at {fn}" if fn else "") for f, v, fn in verdicts), t.s)
    assert ok


def test_c10_numerical_identities():
    with Timer() as t:
        checks = [nm.check_theta_quasiperiodicity(Z, TAU, 40), nm.check_psi(Z, ALPHA, TAU, 40),
                  nm.check_psi_equals_P1(Z, ALPHA, TAU, "+", 40)]
        checks += [nm.check_wp_equals_P(k, Z, TAU, 40) for k in (1, 2, 3)]
    worst = max(c.residual for c in checks)
    ok = worst < 1e-8 and t.s < 10
    record(10, ok, f"worst residual {worst:.2e} over theta, psi, psi = -2 pi i P1+, wp_k = (-1)^k P_k+", t.s)
    assert ok


def test_c11_elliptic_law():
    alpha, tau = -0.2 - 0.3j, 0.1 + 2.5j
    with Timer() as t:
        f1 = family_level1(20, (-14, 14))
        f43 = family_m43(12, (-14, 14))
        c1 = [nm.check_elliptic_shift(f1, m, n, alpha, tau, F(1, 4)) for m, n in ((1, 0), (-1, 0), (1, 1))]
        c43 = [nm.check_elliptic_shift(f43, m, n, pt[0], pt[1], F(-1, 3))
               for m, n in ((1, 0), (-1, 0), (1, 1)) for pt in ((alpha, tau), (ALPHA, TAU))]
    worst = max(c.residual for c in c1 + c43)
    ok = worst < 1e-8 and t.s < 10
    record(11, ok, f"kappa 1/4 (level 1) and -1/3 (level -4/3), worst residual {worst:.2e}", t.s)
    assert ok


def test_c12_admissible_counting():
    with Timer() as t:
        a, b = count_admissible_sl2(2, 3), count_admissible_sl2(3, 1)
    ok = (a, b) == (3, 2) and t.s < 1
    record(12, ok, f"(2,3) -> {a}, (3,1) -> {b}", t.s)
    assert ok


def test_c13_domain_mapping():
    rng = random.Random(20260101)
    bad = []
    with Timer() as t:
        for _ in range(100):
            tau = complex(rng.uniform(-2, 2), rng.uniform(0.05, 3))
            alpha = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
            M = nm.find_sl2_to_domain(alpha, tau, 1)
            (a, b), (c, d) = M
            if a * d - b * c != 1 or not nm.domain_check(*nm.act_sl2(M, alpha, tau), 1):
                bad.append((alpha, tau))
    ok = not bad and t.s < 5
    record(13, ok, f"100 points, {len(bad)} failures", t.s)
    assert ok


def test_c14_property_suite():
    rng = random.Random(14)
    n = 1000
    counts = {}
    with Timer() as t:
        counts["ring"] = sum(ring_laws(rand_series(rng), rand_series(rng), rand_series(rng)) for _ in range(n))
        counts["leibniz"] = sum(leibniz(rand_series(rng), rand_series(rng)) for _ in range(n))
        counts["invert"] = sum(invert_roundtrip(rand_series(rng, unit=True, q_lo=rng.randint(-1, 1))) for _ in range(n))
        counts["commute"] = sum(derivations_commute(rand_series(rng)) for _ in range(n))
        worst = 0.0
        good = 0
        for _ in range(n):
            lam = F(rng.randint(-9, 9), rng.randint(1, 5))
            r = eval_linear(rand_series(rng), rand_series(rng), lam, *rand_point(rng))
            worst = max(worst, r)
            good += r < 1e-12
        counts["linearity"] = good
    ok = all(v == n for v in counts.values()) and t.s < 60
    record(14, ok, f"{counts} of {n} each, worst evaluation defect {worst:.1e}", t.s)
    assert ok

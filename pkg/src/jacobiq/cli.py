"""Command-line entry point: ``jacobiq expand|verify|char|count|map-domain``.

Exit codes: 0 pass, 1 usage error, 2 verification failed (report emitted),
3 domain error or unresolved convention.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import characters as ch
from . import mlde
from . import numeric as nm
from . import special as sp
from .errors import ConventionUnresolved, DomainError, JacobiqError, ParameterError, SearchError, WindowError
from .series import Direction, to_dict

EXIT_PASS, EXIT_USAGE, EXIT_FAIL, EXIT_DOMAIN = 0, 1, 2, 3

DEFAULT_Q_ORDER = 12
DEFAULT_WINDOW = "-12..12"
DEFAULT_TOL = 1e-8
NUMERIC_ORDER = 40


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_window(text: str) -> tuple[Fraction, Fraction]:
    """``"LO..HI"`` with rational endpoints, e.g. ``-8..8`` or ``-1/2..3``."""
    try:
        lo, hi = text.split("..")
        lo, hi = Fraction(lo.strip()), Fraction(hi.strip())
    except ValueError:
        raise UsageError(f"bad window {text!r}; expected LO..HI") from None
    if lo > hi:
        raise UsageError(f"empty window {text!r}")
    return lo, hi


def _rational(text) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a rational number: {text!r}") from None


def _complex(text) -> complex:
    try:
        return nm.parse_complex(text)
    except ValueError:
        raise UsageError(f"not a complex number: {text!r}") from None


def _q_order(args, default=DEFAULT_Q_ORDER) -> Fraction:
    r = _rational(args.q_order) if args.q_order is not None else Fraction(default)
    if r < 0:
        raise UsageError("--q-order must be >= 0")
    return r


def _fix_argv(argv):
    # argparse reads "-8..8" as an option; glue such values onto their flag
    out, it = [], iter(argv)
    for a in it:
        if a in ("--y-window", "--alpha", "--tau", "--z", "--point", "--kappa") :
            try:
                v = next(it)
            except StopIteration:
                out.append(a)
                break
            out.append(f"{a}={v}")
        else:
            out.append(a)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="jacobiq", description="Exact q/y-series for Jacobi forms and their MLDEs.")
    sub = p.add_subparsers(dest="cmd", parser_class=_Parser)

    def common(sp_, numeric=False):
        sp_.add_argument("--q-order", default=None, help="keep q-exponents <= R (default 12; 40 for numeric laws)")
        sp_.add_argument("--y-window", default=DEFAULT_WINDOW)
        sp_.add_argument("--tol", type=float, default=DEFAULT_TOL)
        sp_.add_argument("--json", action="store_true")
        sp_.add_argument("--output", default=None, help="write the report to a file as well")

    e = sub.add_parser("expand", help="expand a special function")
    e.add_argument("tag", help="one of: " + ", ".join(sorted(sp.TAGS)))
    e.add_argument("--k", type=int, default=None)
    e.add_argument("--m", type=int, default=None)
    e.add_argument("--i", type=int, default=0)
    e.add_argument("--j", type=int, default=0)
    e.add_argument("--n", type=int, default=1)
    e.add_argument("--sign", choices=["+", "-"], default="+")
    e.add_argument("--direction", choices=["pos_y", "neg_y"], default="pos_y")
    e.add_argument("--z-order", type=int, default=8)
    common(e)

    v = sub.add_parser("verify", help="run a verifier")
    v.add_argument("kind", choices=["curvature", "isospectral", "mlde", "numeric"])
    v.add_argument("--system", choices=["level1", "level1-rederived"], default="level1")
    v.add_argument("--bracket-sign", type=int, choices=[1, -1], default=None)
    v.add_argument("--family", choices=["level1", "m43"], default="level1")
    v.add_argument("--member", default="all")
    v.add_argument("--variant", choices=["printed", "rederived"], default="printed")
    v.add_argument("--law", choices=["theta-shift", "psi-shift", "psi-p1", "wp-p", "elliptic", "modular"])
    v.add_argument("--point", default="0.2-0.4i,0.1+2i", help="'<alpha>,<tau>'")
    v.add_argument("--z", default="0.3+0.2i")
    v.add_argument("--k", type=int, default=2)
    v.add_argument("--sign", choices=["+", "-"], default="+")
    v.add_argument("--m", type=int, default=1)
    v.add_argument("--n", type=int, default=0)
    v.add_argument("--kappa", default=None)
    v.add_argument("--matrix", default="0,-1,1,0", help="a,b,c,d for the modular law")
    common(v)

    c = sub.add_parser("char", help="expand a character")
    c.add_argument("--family", choices=["level1", "m43"], required=True)
    c.add_argument("--member", type=int, default=0)
    common(c)

    n = sub.add_parser("count", help="count admissible sl2 weights")
    n.add_argument("--p", type=int, required=True)
    n.add_argument("--u", type=int, required=True)
    n.add_argument("--json", action="store_true")
    n.add_argument("--output", default=None)

    d = sub.add_parser("map-domain", help="find an SL2(Z) element moving (alpha, tau) into the domain")
    d.add_argument("--alpha", required=True)
    d.add_argument("--tau", required=True)
    d.add_argument("--N", type=int, default=1)
    d.add_argument("--search-bound", type=int, default=200)
    d.add_argument("--json", action="store_true")
    d.add_argument("--output", default=None)
    return p


# -- expand -------------------------------------------------------------------------------------


def _need(val, flag, tag):
    if val is None:
        raise UsageError(f"{tag} needs {flag}")
    return val


def expand_tag(args, R, window):
    t = args.tag
    if t not in sp.TAGS:
        raise UsageError(f"unknown tag {t!r}; known: {', '.join(sorted(sp.TAGS))}")
    if t == "G2k":
        return sp.eisenstein_G(_need(args.k, "--k", t), R)
    if t == "Ek":
        return sp.eisenstein_E(_need(args.k, "--k", t), R)
    if t == "Pplus":
        return sp.p_plus(_need(args.k, "--k", t), R, window)
    if t == "Pminus":
        return sp.p_minus(_need(args.k, "--k", t), R, window)
    if t == "Qk":
        return sp.q_k(_need(args.k, "--k", t), R, window, Direction(args.direction))
    if t == "Em":
        return sp.twisted_E(_need(args.m, "--m", t), R, window, args.sign)
    if t in ("E1plus", "E1minus"):
        return sp.twisted_E1("+" if t == "E1plus" else "-", R, window)
    if t == "wp":
        return sp.weierstrass_wp(_need(args.k, "--k", t), args.z_order, R)
    if t == "theta11":
        return sp.theta11(R, window)
    if t == "theta_i0":
        return sp.theta_i0(args.i, R, window)
    if t == "theta_j":
        return sp.theta_j_adm(args.j, R, window)
    if t == "eta":
        return sp.eta(R)
    if t == "eta_pow":
        return sp.eta_pow(args.n, R)
    raise UsageError(f"unknown tag {t!r}")


def _table(s) -> str:
    rows = [(str(q), str(y), str(c)) for q, y, c in s.terms()]
    head = ("q", "y", "coeff")
    w = [max(len(r[i]) for r in rows + [head]) for i in range(3)]
    lines = ["  ".join(h.rjust(w[i]) for i, h in enumerate(head))]
    lines += ["  ".join(r[i].rjust(w[i]) for i in range(3)) for r in rows]
    return "\n".join(lines)


def cmd_expand(args):
    R = _q_order(args)
    window = parse_window(args.y_window)
    out = expand_tag(args, R, window)
    if isinstance(out, sp.ZLaurent):
        d = {"laurent_in": "2 pi i z", "two_pi_i_pow": out.two_pi_i_pow,
             "tag": out.tag.to_dict() if out.tag else None,
             "coefficients": {str(e): to_dict(out[e]) for e in out.exponents()}}
        text = "\n".join(f"w^{e}:\n{_table(out[e])}" for e in out.exponents())
        return EXIT_PASS, d, text
    d = to_dict(out)
    pre = d.get("prefactor")
    text = _table(out)
    if pre and (pre["i_pow"] or pre["two_pi_i_pow"]):
        text = f"prefactor: i^{pre['i_pow']} (2 pi i)^{pre['two_pi_i_pow']}\n" + text
    return EXIT_PASS, d, text


# -- verify ---------------------------------------------------------------------------------------


def _verdict(ok: bool) -> int:
    return EXIT_PASS if ok else EXIT_FAIL


def verify_curvature(args):
    R = _q_order(args, 10)
    window = parse_window(args.y_window) if args.y_window != DEFAULT_WINDOW else (Fraction(-8), Fraction(8))
    if args.system == "level1":
        sys_ = mlde.build_level1_system(R, window)
        bs = 1 if args.bracket_sign is None else args.bracket_sign
    else:
        sys_ = mlde.build_level1_system_rederived(R, window)
        bs = -1 if args.bracket_sign is None else args.bracket_sign
    rep = mlde.curvature_report(sys_, R + 1, window, bs)
    rep.pop("entries")
    if args.system == "level1" and not rep["zero"]:
        alt = mlde.curvature_report(sys_, R + 1, window, -bs)
        red = mlde.curvature_report(mlde.build_level1_system_rederived(R, window), R + 1, window, -1)
        rep["diagnostics"] = {
            "opposite_bracket_sign": {"zero": alt["zero"], "first_nonzero": alt["first_nonzero"]},
            "rederived_system": {"zero": red["zero"], "bracket_sign": -1, "first_nonzero": red["first_nonzero"],
                                 "system": red["system"]},
        }
    text = f"curvature ({args.system}, bracket {bs:+d}) to q^{R} on {window[0]}..{window[1]}: " + (
        "zero" if rep["zero"] else f"NONZERO, first {rep['first_nonzero']}")
    if "diagnostics" in rep:
        text += f"\n  rederived system, bracket -1: {'zero' if rep['diagnostics']['rederived_system']['zero'] else 'nonzero'}"
    return _verdict(rep["zero"]), rep, text


def _system(args, R, window):
    if args.system == "level1":
        return mlde.build_level1_system(R, window)
    return mlde.build_level1_system_rederived(R, window)


def verify_isospectral(args):
    R = _q_order(args, 2)
    window = parse_window(args.y_window) if args.y_window != DEFAULT_WINDOW else (Fraction(-8), Fraction(8))
    sys_ = _system(args, R, window)
    rep = mlde.isospectrality_check(sys_, window)
    d = rep.to_dict()
    d["system"] = sys_.provenance
    d["y_independent"] = rep.y_independent
    lead = [Fraction(-1, 24), Fraction(5, 24)]
    off = mlde.exponent_offsets(rep.exponents, lead)
    d["character_leading_exponents"] = [str(x) for x in lead]
    d["exponent_offsets"] = None if off is None else [str(x) for x in off]
    text = (f"char poly of B_0: {[str(c) for c in rep.char_poly_coeffs]}; y-dependence "
            f"{'none' if rep.y_independent else d['first_nonzero']}; exponents {d['exponents']}; "
            f"offsets from characters {d['exponent_offsets']}")
    return _verdict(rep.y_independent), d, text


def _members(args, n):
    if args.member == "all":
        return list(range(n))
    try:
        i = int(args.member)
    except ValueError:
        raise UsageError("--member must be an integer or 'all'") from None
    if not 0 <= i < n:
        raise UsageError(f"--member must lie in 0..{n - 1}")
    return [i]


def verify_mlde(args):
    R = _q_order(args)
    window = parse_window(args.y_window)
    pad = ch._pad(window, 3 * (int(R) + 2))
    if args.family == "level1":
        conv = ch._default_level1_convention()
        members = _members(args, 2)
        kw = {} if args.variant == "printed" else {"q1_sign": -1, "e2_sign": -1}
        builder = mlde.build_level1_scalar
        chars = [ch.char_level1(i, R, pad, conv) for i in members]
    else:
        if args.variant != "printed":
            raise UsageError("--variant rederived applies to the level-1 family only")
        conv = ch._default_m43_convention()
        members = _members(args, 3)
        kw = {}
        builder = mlde.build_m43_scalar
        chars = [ch.char_level_m43(i, R, pad, conv) for i in members]
    reports = []
    for i, u in zip(members, chars):
        rp = mlde.scalar_residual_report(builder, u, R, window, **kw)
        rp["member"] = i
        reports.append(rp)
    ok = all(r["zero"] and r["covers_request"] for r in reports)
    d = {"family": args.family, "variant": args.variant, "q_order": str(R),
         "y_window": [str(window[0]), str(window[1])], "verdict": "zero" if ok else "nonzero",
         "members": reports, "convention": conv.to_dict()}
    first = next((r for r in reports if not r["zero"]), None)
    d["first_nonzero"] = None if first is None else dict(first["first_nonzero"] or {}, member=first["member"])
    lines = [f"mlde {args.family} ({args.variant}) to q^{R} on {window[0]}..{window[1]}: {d['verdict']}"]
    for r in reports:
        lines.append(f"  member {r['member']}: " + ("zero" if r["zero"] else f"first nonzero {r['first_nonzero']}")
                     + ("" if r["covers_request"] else f" (guaranteed only on {r['window']})"))
    lines.append(f"  convention: q_scale={conv.q_scale} y_scale={conv.y_scale} q_shift={conv.q_shift}")
    return _verdict(ok), d, "\n".join(lines)


def _family(name, R, window):
    return ch.family_level1(R, window) if name == "level1" else ch.family_m43(R, window)


def verify_numeric(args):
    if args.law is None:
        raise UsageError("verify numeric needs --law")
    try:
        alpha, tau = nm.parse_point(args.point)
    except ValueError as e:
        raise UsageError(str(e)) from None
    z = _complex(args.z)
    order = int(_q_order(args, NUMERIC_ORDER))
    law = args.law
    if law == "theta-shift":
        chk = nm.check_theta_quasiperiodicity(z, tau, order, args.tol)
    elif law == "psi-shift":
        chk = nm.check_psi(z, alpha, tau, order, args.tol)
    elif law == "psi-p1":
        chk = nm.check_psi_equals_P1(z, alpha, tau, args.sign, order, args.tol)
    elif law == "wp-p":
        chk = nm.check_wp_equals_P(args.k, z, tau, order, args.tol)
    elif law == "elliptic":
        fam = _family(args.family, 14, (-14, 14))
        kappa = fam.index if args.kappa is None else _rational(args.kappa)
        chk = nm.check_elliptic_shift(fam, args.m, args.n, alpha, tau, kappa, args.tol, order=order)
    else:
        try:
            a, b, c, d = (int(x) for x in args.matrix.split(","))
        except ValueError:
            raise UsageError("--matrix must be a,b,c,d") from None
        if a * d - b * c != 1:
            raise UsageError("--matrix must have determinant 1")
        fam = _family(args.family, 14, (-14, 14))
        kappa = fam.index if args.kappa is None else _rational(args.kappa)
        samples = [alpha * t for t in (1, 0.5, 0.25, -0.5, 0.75, 0.1)]
        chk = nm.check_modular_span(fam, [[a, b], [c, d]], samples, tau, kappa, args.tol, order)
    d = chk.to_dict()
    text = f"{law}: residual {chk.residual:.3e} (tol {chk.tol:g}) -> {'pass' if chk.passed else 'FAIL'}"
    if chk.matched_permutation_and_factor:
        text += f"\n  match {chk.matched_permutation_and_factor}"
    return _verdict(chk.passed), d, text


def cmd_verify(args):
    return {"curvature": verify_curvature, "isospectral": verify_isospectral,
            "mlde": verify_mlde, "numeric": verify_numeric}[args.kind](args)


# -- char, count, map-domain -----------------------------------------------------------------------


def cmd_char(args):
    R = _q_order(args)
    window = parse_window(args.y_window)
    if args.family == "level1":
        fam = ch.family_level1(R, window)
    else:
        fam = ch.family_m43(R, ch._pad(window, 3 * (int(R) + 2)))
    if not 0 <= args.member < len(fam.members):
        raise UsageError(f"--member must lie in 0..{len(fam.members) - 1}")
    label, s = fam.members[args.member]
    if args.family == "m43":
        from .series import truncate

        s = truncate(s, y_window=window)
    d = to_dict(s)
    d["family"] = fam.label
    d["member"] = {"index": args.member, "label": label}
    d["leading_exponent"] = str(fam.leading_exponents[args.member])
    d["convention"] = fam.convention.to_dict() if fam.convention else None
    text = f"{fam.label} member {args.member} ({label}), leading q^{d['leading_exponent']}\n" + _table(s)
    return EXIT_PASS, d, text


def cmd_count(args):
    n = ch.count_admissible_sl2(args.p, args.u)
    w = ch.admissible_weights_sl2(args.p, args.u)
    d = {"p": args.p, "u": args.u, "count": n, "weights": [{"r": r, "s": s, "lambda_1": str(l)} for r, s, l in w]}
    return EXIT_PASS, d, str(n)


def cmd_map_domain(args):
    alpha, tau = _complex(args.alpha), _complex(args.tau)
    M = nm.find_sl2_to_domain(alpha, tau, args.N, args.search_bound)
    a2, t2 = nm.act_sl2(M, alpha, tau)
    ok = nm.domain_check(a2, t2, args.N)
    d = {"alpha": [alpha.real, alpha.imag], "tau": [tau.real, tau.imag], "N": args.N, "matrix": M,
         "image": {"alpha": [a2.real, a2.imag], "tau": [t2.real, t2.imag]}, "in_domain": ok}
    text = f"[[{M[0][0]}, {M[0][1]}], [{M[1][0]}, {M[1][1]}]]  -> alpha'={a2:.6g}, tau'={t2:.6g}"
    return _verdict(ok), d, text


COMMANDS = {"expand": cmd_expand, "verify": cmd_verify, "char": cmd_char, "count": cmd_count,
            "map-domain": cmd_map_domain}


def _emit(args, d, text, stream):
    body = json.dumps(d, indent=2, default=str) if getattr(args, "json", False) else text
    print(body, file=stream)
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(body + "\n")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_fix_argv(argv))
        if args.cmd is None:
            raise UsageError("missing subcommand")
        code, d, text = COMMANDS[args.cmd](args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ParameterError, WindowError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ConventionUnresolved as e:
        d = {"error": "convention unresolved", "message": str(e), "convention": e.record.to_dict()}
        _emit(args, d, f"convention unresolved: {e}", sys.stdout)
        return EXIT_DOMAIN
    except (DomainError, SearchError) as e:
        d = {"error": type(e).__name__, "message": str(e)}
        _emit(args, d, f"{type(e).__name__}: {e}", sys.stdout)
        return EXIT_DOMAIN
    except JacobiqError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    _emit(args, d, text, sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())

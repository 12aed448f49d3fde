"""Command-line interface: ``germsum <subcommand> [options]``.

Every subcommand prints one JSON document on stdout.  Exit codes: 0 on
success or PASS, 1 on a FAIL verdict, 2 on usage, parse or input errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from fractions import Fraction

import mpmath

from germsum import __version__, borel, decompose, geometry, gevrey, operators
from germsum.config import Config, load_config, parse_window
from germsum.coeffs import parse_rational
from germsum.errors import GermsumError, ParseError
from germsum.formats import loads_series, series_to_obj
from germsum.mseries import Germ, MultiSeries, euler_compose
from germsum.polyexpr import infer_dim, parse_polynomial, parse_series

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


# helpers ----------------------------------------------------------------------
def _cfg(args) -> Config:
    cfg = load_config(args.config)
    over = {
        "default_cap": args.default_cap,
        "float_precision_bits": args.precision_bits,
        "s_tol": args.s_tol,
        "residual_tol": args.residual_tol,
        "quadrature_tol": args.quadrature_tol,
    }
    if args.window is not None:
        over["fit_window"] = parse_window(args.window)
    return cfg.with_overrides(**over)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None


def _series(args, cfg: Config) -> MultiSeries:
    """The input series from ``--series-file`` or ``--expr``."""
    cap = getattr(args, "cap", None)
    if args.series_file:
        f = loads_series(_read(args.series_file), args.series_file)
        if cap is not None:
            if cap > f.cap:
                raise ParseError(f"cap mismatch: requested {cap} but {args.series_file} is certified to {f.cap}")
            f = f.truncate(cap)
        return f
    if args.expr:
        return parse_series(args.expr, args.dim, cfg.default_cap if cap is None else cap)
    raise ParseError("give a series with --expr or --series-file")


def _germ(text: str | None, path: str | None, dim: int | None = None) -> Germ:
    if path:
        return Germ(loads_series(_read(path), path))
    if text is None:
        raise ParseError("a germ is required")
    return Germ.polynomial(parse_polynomial(text, dim))


def _ints(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.replace("(", "").replace(")", "").split(","))
    except ValueError:
        raise ParseError(f"expected comma-separated integers, got {text!r}") from None


def _points(text: str) -> list:
    out = []
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        parts = chunk.split(",")
        try:
            re_ = float(parts[0])
            im_ = float(parts[1]) if len(parts) > 1 else 0.0
        except (ValueError, IndexError):
            raise ParseError(f"bad point {chunk!r}; expected 're,im'") from None
        out.append(complex(re_, im_))
    if not out:
        raise ParseError("no sample points given")
    return out


def _cnum(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _emit(obj, code: int = EXIT_OK) -> int:
    sys.stdout.write(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")
    return code


def _write_csv(path: str, header: list, rows: list) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _dec_obj(dec: decompose.Decomposition) -> dict:
    base = list(dec.base) if dec.is_monomial() else {"germ": series_to_obj(dec.base.series)}
    return {
        "base": base,
        "ell": None if dec.ell is None else [str(w) for w in dec.ell.weights],
        "n_max": dec.n_max,
        "certified_cap": dec.certified_cap,
        "components": [series_to_obj(c) for c in dec.components],
        "tail": None if dec.tail is None else series_to_obj(dec.tail),
    }


# subcommands ------------------------------------------------------------------
def cmd_series(args, cfg: Config) -> int:
    f = _series(args, cfg)
    if args.derive:
        f = f.derive(args.derive)
    if args.pullback:
        f = geometry.parse_word(args.pullback, f.dim).pullback_series(f)
    if args.blowup is not None:
        xi = args.blowup if args.blowup.lower() in ("inf", "infinity", "oo") else Fraction(str(parse_rational(args.blowup)))
        f = geometry.blowup_chart(f, xi)
    if args.ramify:
        j, m = _ints(args.ramify)
        f = geometry.ramify(f, j, m)
    if args.invert:
        f = f.invert_unit()
    return _emit({"command": "series", "cap": f.cap, "series": series_to_obj(f), "expr": f.to_expr()})


def cmd_decompose(args, cfg: Config) -> int:
    f = _series(args, cfg)
    if args.alpha:
        dec = decompose.t_alpha(f, _ints(args.alpha), args.n_max)
    else:
        if not (args.germ or args.germ_file) or not args.ell or args.n_max is None:
            raise ParseError("decompose needs --alpha, or --germ/--germ-file with --ell and --n-max")
        P = _germ(args.germ, args.germ_file, f.dim)
        dec = decompose.t_p_ell(f, P, decompose.LinearForm.parse(args.ell), args.n_max)
    if args.regroup:
        dec = decompose.power_regroup(dec, args.regroup)
    ok = dec.reconstruct().equal_mod(f, dec.certified_cap)
    obj = {"command": "decompose", "cap": f.cap, "reconstructs": ok}
    obj.update(_dec_obj(dec))
    return _emit(obj)


def cmd_gevrey(args, cfg: Config) -> int:
    f = _series(args, cfg)
    obj: dict = {"command": "gevrey", "cap": f.cap}
    rows = []
    if args.split:
        rep = gevrey.split_infeasibility(f, cfg.fit_window if args.window else None)
        obj["split"] = rep.as_dict()
    elif args.radius:
        v = gevrey.radius_estimate(f, cfg)
        obj["radius"] = v.as_dict()
        rows = [[n, m] for n, m in sorted(gevrey.shell_maxima(f).items())]
    elif args.alpha:
        fit = gevrey.fit_monomial_gevrey(f, _ints(args.alpha), None, cfg)
        obj["alpha"] = list(_ints(args.alpha))
        obj["fit"] = fit.as_dict()
        obj["window"] = list(fit.window)
        rows = [[n, m] for n, m in sorted(gevrey.shell_maxima(f).items())]
    else:
        if not (args.germ or args.germ_file) or not args.ell or args.n_max is None:
            raise ParseError("gevrey needs --alpha, --radius, --split, or --germ with --ell and --n-max")
        P = _germ(args.germ, args.germ_file, f.dim)
        dec = decompose.t_p_ell(f, P, decompose.LinearForm.parse(args.ell), args.n_max)
        fit = gevrey.fit_component_gevrey(dec, args.r, None, cfg)
        obj["certified_cap"] = dec.certified_cap
        obj["fit"] = fit.as_dict()
        obj["window"] = list(fit.window)
        rows = [[n, gevrey.log_majorant(c, args.r)] for n, c in enumerate(dec.components)]
    if args.emit_plot_data and rows:
        _write_csv(args.emit_plot_data, ["n", "log_value"], rows)
    return _emit(obj)


def _read_couples(args) -> list:
    texts = list(args.couple or [])
    if args.couples:
        for line in _read(args.couples).splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                texts.append(line)
    if not texts:
        raise ParseError("no couples given (use --couples FILE or --couple TEXT)")
    return [geometry.parse_couple(t) for t in texts]


def cmd_monomialize(args, cfg: Config) -> int:
    cs = _read_couples(args)
    res = geometry.order_couples(cs)
    return _emit(
        {
            "command": "monomialize",
            "word": str(res.word),
            "permutation": list(res.permutation),
            "images": [str(c) for c in res.images],
            "trace": [
                {"step": str(t.step), "pair": list(t.pair), "l": t.l, "m": t.m, "bound": None if t.bound is None else str(t.bound)}
                for t in res.trace
            ],
        }
    )


def cmd_equiv(args, cfg: Config) -> int:
    if args.a and args.b:
        a, b = geometry.parse_couple(args.a), geometry.parse_couple(args.b)
        return _emit(
            {
                "command": "equiv",
                "equivalent": geometry.couple_equiv(a, b),
                "order": geometry.couple_compare(a, b).name,
            }
        )
    if (args.pa or args.pa_file) and (args.pb or args.pb_file):
        Pa = _germ(args.pa, args.pa_file, max(infer_dim(t) for t in (args.pa or "x1", args.pb or "x1")))
        Pb = _germ(args.pb, args.pb_file, Pa.dim)
        rep = geometry.germ_couple_equiv(geometry.GermCouple(Pa, Fraction(args.ka)), geometry.GermCouple(Pb, Fraction(args.kb)))
        return _emit(
            {
                "command": "equiv",
                "equivalent": rep.equivalent,
                "exact": rep.exact,
                "qualifier": rep.qualifier,
                "p_a": rep.p_a,
                "p_b": rep.p_b,
                "certified_cap": rep.certified_cap,
                "unit": None if rep.unit is None else series_to_obj(rep.unit),
            }
        )
    raise ParseError("equiv needs --a and --b couples, or germs --pa/--pb")


def cmd_borel_sum(args, cfg: Config) -> int:
    k = Fraction(args.k)
    theta = float(args.theta)
    xs = _points(args.points)
    extra: dict = {}
    if args.builtin == "euler":
        handle = borel.ContinuationHandle.closed_form("log1p")
        trunc = borel.euler_one_var(args.terms)
    elif args.series_file:
        f = loads_series(_read(args.series_file), args.series_file)
        trunc = borel.OneVarSeries.from_multiseries(f)
        if args.closed_form:
            handle = borel.ContinuationHandle.closed_form(args.closed_form)
        else:
            L = args.pade if args.pade is not None else f.cap // 2
            handle = borel.ContinuationHandle.pade(borel.formal_borel(trunc, k), L, f.cap - L if args.pade is None else None)
            extra["pade_pole_arguments"] = handle.pole_arguments()
        extra["cap"] = f.cap
    else:
        raise ParseError("borel-sum needs --builtin euler or --series-file")
    rep = borel.laplace_sum(handle, k, theta, xs, cfg=cfg)
    samples = []
    rows = []
    for s in rep.samples:
        d = {"x": _cnum(s.x), "value": _cnum(s.value), "est_error": float(s.est_error)}
        if args.truncation:
            with mpmath.workdps(cfg.dps):
                try:
                    v, e = borel.optimal_truncation(trunc, s.x)
                    d["optimal_truncation"] = {"value": _cnum(v), "est_error": float(e)}
                except GermsumError as exc:
                    d["optimal_truncation"] = {"error": str(exc)}
        samples.append(d)
        rows.append([s.x.real if isinstance(s.x, complex) else float(mpmath.re(s.x)), float(mpmath.im(s.x)),
                     float(mpmath.re(s.value)), float(mpmath.im(s.value)), float(s.est_error)])
    if args.emit_plot_data:
        _write_csv(args.emit_plot_data, ["x_re", "x_im", "value_re", "value_im", "bound"], rows)
    obj = {"command": "borel-sum", "k": str(k), "theta": theta, "continuation": handle.label, "samples": samples}
    obj.update(extra)
    return _emit(obj)


def _remainder_points(P: MultiSeries, count: int = 8) -> list:
    """Diagonal points ``(r, .., r)`` with ``|P| in [1e-3, 1e-1]`` and ``P`` off the negative axis."""
    pts = []
    for i in range(400):
        r = 10 ** (-3 + 3 * i / 399)
        x = [r] * P.dim
        v = complex(P.evaluate_mp(x))
        if 1e-3 <= abs(v) <= 1e-1 and abs(math.atan2(v.imag, v.real)) < math.pi / 2:
            pts.append(x)
    if len(pts) <= count:
        return pts
    step = (len(pts) - 1) / (count - 1)
    return [pts[round(i * step)] for i in range(count)]


def cmd_verify_euler(args, cfg: Config) -> int:
    P = parse_polynomial(args.builtin, args.dim)
    cap = args.cap if args.cap is not None else cfg.default_cap
    axes = {}
    for j in range(1, P.dim + 1):
        axes[str(j)] = operators.euler_system_check(Germ.polynomial(P), j, cap)
    grid = [0.01, 0.02, 0.05, 0.1, 0.15, 0.2]
    residual = borel.euler_ode_residual(grid)
    ode_ok = residual < 1e-6
    # remainder fit of the Borel sum composed with P, components from t_p_ell
    lo, hi = 3, 12
    ell = decompose.LinearForm.degree_compatible(P.dim, P.degree() * (hi + 1))
    nu = decompose.nu_ell(P, ell)
    rcap = sum(nu) * (hi + 1)
    Pr = P.as_polynomial(rcap)
    dec = decompose.t_p_ell(euler_compose(Pr), Pr, ell, hi + 1)
    pts = _remainder_points(P)
    rem: dict
    if len(pts) >= 2:
        vals = borel.germ_sum_values(borel.ContinuationHandle.closed_form("log1p"), 1, Pr, pts, cfg, dps=40)
        r = borel.remainder_check(vals, dec, Pr, 1, pts, (lo, hi), cfg, dps=40)
        rem = r.as_dict()
        rem_ok = r.status == "CERTIFIED"
    else:
        rem = {"status": "SKIPPED", "reason": "no diagonal sample points with |P| in [1e-3, 1e-1]"}
        rem_ok = True
    passed = all(axes.values()) and ode_ok and rem_ok
    return _emit(
        {
            "command": "verify-euler",
            "P": P.to_expr(),
            "cap": cap,
            "certified_cap": cap - 1,
            "axes": axes,
            "ode_residual": residual,
            "remainder": rem,
            "window": [lo, hi],
            "result": "PASS" if passed else "FAIL",
        },
        EXIT_OK if passed else EXIT_FAIL,
    )


def cmd_verify_operator(args, cfg: Config) -> int:
    # operator inputs are polynomials, also when read from series files
    dim = max(infer_dim(t) for t in (args.p or "x1", args.q or "x1"))
    P = Germ.polynomial(_germ(args.p, args.p_file, dim).series)
    Q = Germ.polynomial(_germ(args.q, args.q_file, P.dim).series)
    cap = args.cap if args.cap is not None else cfg.default_cap
    op = operators.build_L(P, Q, args.axis)
    rep = operators.two_euler_report(P, Q, args.axis, cap, op)
    passed = bool(rep)
    return _emit(
        {
            "command": "verify-operator",
            "axis": args.axis,
            "cap": cap,
            "certified_cap": rep.compared_up_to,
            "A": series_to_obj(op.A),
            "B": series_to_obj(op.B),
            "C": series_to_obj(op.C),
            "homogeneous_N": rep.homogeneous_N,
            "homogeneous_checked": rep.homogeneous_checked,
            "result": "PASS" if passed else "FAIL",
        },
        EXIT_OK if passed else EXIT_FAIL,
    )


def cmd_tauberian(args, cfg: Config) -> int:
    f = _series(args, cfg)
    cs = _read_couples(args)
    rep = gevrey.tauberian_verdict(f, cs, cfg)
    lo, hi = cfg.fit_window
    obj = {"command": "tauberian-verdict", "cap": f.cap, "window": [lo, f.cap if hi is None else min(hi, f.cap)]}
    obj.update(rep.as_dict())
    return _emit(obj, rep.exit_code)


# parser ---------------------------------------------------------------------------
def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("configuration")
    g.add_argument("--config", help="TOML file with key = value settings")
    g.add_argument("--default-cap", type=int, help="cap used when none is given")
    g.add_argument("--precision-bits", type=int, help="working precision of float stages")
    g.add_argument("--window", help="fit window 'a:b'")
    g.add_argument("--s-tol", type=float)
    g.add_argument("--residual-tol", type=float)
    g.add_argument("--quadrature-tol", type=float)
    return p


def _source(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--series-file", help="series JSON document")
    g.add_argument("--expr", help="series expression, e.g. 'E(x1*x2)' or 'x1 + x2^2'")
    p.add_argument("--dim", type=int)
    p.add_argument("--cap", type=int)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="germsum", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"germsum {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("series", parents=[common], help="parse, transform and print a series")
    _source(p)
    p.add_argument("--derive", type=int, metavar="J")
    p.add_argument("--pullback", metavar="WORD", help="e.g. 'pi(2,1)^3 ; ram(1,2)'")
    p.add_argument("--blowup", metavar="XI", help="blow-up chart: a rational or 'inf'")
    p.add_argument("--ramify", metavar="J,M")
    p.add_argument("--invert", action="store_true", help="invert a unit")
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("decompose", parents=[common], help="split along a monomial or a germ")
    _source(p)
    p.add_argument("--alpha", help="monomial exponent, e.g. '1,1'")
    p.add_argument("--germ", help="germ polynomial expression")
    p.add_argument("--germ-file")
    p.add_argument("--ell", help="linear form weights, e.g. '1,3/2'")
    p.add_argument("--n-max", "--nmax", type=int, dest="n_max")
    p.add_argument("--regroup", type=int, metavar="M")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("gevrey", parents=[common], help="growth fits and verdicts")
    _source(p)
    p.add_argument("--alpha")
    p.add_argument("--radius", action="store_true")
    p.add_argument("--split", action="store_true", help="diagonal split infeasibility test")
    p.add_argument("--germ")
    p.add_argument("--germ-file")
    p.add_argument("--ell")
    p.add_argument("--n-max", type=int)
    p.add_argument("--r", type=float, default=0.5, help="polydisc radius for component majorants")
    p.add_argument("--emit-plot-data", metavar="CSV")
    p.set_defaults(func=cmd_gevrey)

    p = sub.add_parser("monomialize", parents=[common], help="order couples by monomial blow-ups")
    p.add_argument("--couples", metavar="FILE", help="one couple per line, e.g. 'alpha=[1,3] k=1'")
    p.add_argument("--couple", action="append")
    p.set_defaults(func=cmd_monomialize)

    p = sub.add_parser("equiv", parents=[common], help="equivalence of couples or germ couples")
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--pa")
    p.add_argument("--pb")
    p.add_argument("--pa-file")
    p.add_argument("--pb-file")
    p.add_argument("--ka", default="1")
    p.add_argument("--kb", default="1")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("borel-sum", parents=[common], help="Borel-Laplace sums along a ray")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--series-file")
    g.add_argument("--builtin", choices=["euler"])
    p.add_argument("--k", default="1")
    p.add_argument("--theta", default="0")
    p.add_argument("--points", required=True, help="'re,im;re,im;...'")
    p.add_argument("--closed-form", choices=sorted(borel.CLOSED_FORMS))
    p.add_argument("--pade", type=int, metavar="L")
    p.add_argument("--terms", type=int, default=60, help="Euler coefficients kept for truncation")
    p.add_argument("--truncation", action="store_true", help="also report optimal truncation")
    p.add_argument("--emit-plot-data", metavar="CSV")
    p.set_defaults(func=cmd_borel_sum)

    p = sub.add_parser("verify-euler", parents=[common], help="Euler system, ODE residual and remainder fit")
    p.add_argument("--builtin", required=True, metavar="P", help="germ polynomial, e.g. 'x1*x2'")
    p.add_argument("--dim", type=int)
    p.add_argument("--cap", type=int)
    p.set_defaults(func=cmd_verify_euler)

    p = sub.add_parser("verify-operator", parents=[common], help="second order operator for E(P) + E(Q)")
    p.add_argument("--p")
    p.add_argument("--q")
    p.add_argument("--p-file")
    p.add_argument("--q-file")
    p.add_argument("--axis", type=int, default=1)
    p.add_argument("--cap", type=int)
    p.set_defaults(func=cmd_verify_operator)

    p = sub.add_parser("tauberian-verdict", parents=[common], help="Gevrey report and forced-convergence check")
    _source(p)
    p.add_argument("--couples", metavar="FILE")
    p.add_argument("--couple", action="append")
    p.set_defaults(func=cmd_tauberian)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _cfg(args)
        return args.func(args, cfg)
    except _UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except GermsumError as exc:
        sys.stderr.write(f"germsum: error: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE


def main(argv=None) -> int:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

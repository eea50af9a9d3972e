"""Command-line interface.

Every command prints one report.  ``--output structured`` emits JSON lines
whose exact rationals are "a/b" strings; scalars and series use their
machine forms.  Exit codes: 0 success, 2 usage, 3 input parse errors,
4 kernel errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from . import curve, formats, lattice, series, vectors
from .errors import ParseError, PerfectoidError
from .scalar import Precision, fmt_exp

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_KERNEL = 0, 2, 3, 4


class Context:
    def __init__(self, args):
        try:
            self.prec = Precision(args.p, args.imax, Fraction(args.tprec), Fraction(args.xdeg))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad precision: {exc}") from exc
        self.q = formats.parse_scalar(args.q, self.prec)
        if self.q.is_zero() or not 0 < self.q.valuation() < self.prec.tprec:
            raise ParseError("q must satisfy 0 < val(q) < tprec")
        self.seed = args.seed
        self.output = args.output
        self.timing = args.timing

    def config(self) -> dict:
        d = self.prec.as_dict()
        d["q"] = self.q.to_machine()
        d["seed"] = self.seed
        return d


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _series_input(ctx: Context, args) -> series.PerfSeries:
    if args.series is not None:
        return formats.parse_series(args.series, ctx.prec)
    if args.file is None:
        raise ParseError("give a series file or --series")
    return formats.read_series(_read(args.file), ctx.prec)


def _val(x) -> str:
    return fmt_exp(x)


# -- commands ---------------------------------------------------------------


def cmd_prepare(ctx: Context, args) -> dict:
    g = _series_input(ctx, args)
    prep = series.weierstrass_prepare(g, schedule=args.schedule)
    resid = g - prep.unit * prep.monic
    return {
        "input": g.to_machine(),
        "order": _val(prep.order),
        "level": prep.level,
        "rescaled_degree": _val(prep.order * ctx.prec.p**prep.level),
        "unit": prep.unit.to_machine(),
        "monic": prep.monic.to_machine(),
        "iterations": prep.iterations,
        "residual_val": _val(resid.gauss_val()),
    }


def _variant(ctx: Context, text: str) -> curve.CechComplexData:
    if text == "plain":
        return curve.CechComplexData(ctx.q, ctx.prec)
    if text.startswith(("unit-shifted:", "unit_shifted:")):
        n = Fraction(text.split(":", 1)[1])
        if not ctx.prec.in_lattice(n) or n == 0:
            raise ParseError(f"shift {n} is not a nonzero lattice exponent")
        return curve.CechComplexData(ctx.q, ctx.prec, n)
    raise ParseError(f"unknown variant {text!r}")


def cmd_cech(ctx: Context, args) -> dict:
    return curve.cech_report(_variant(ctx, args.variant))


def _divisor(ctx: Context, args) -> lattice.PeriodicDivisor:
    if args.file is None:
        return lattice.PeriodicDivisor(lattice.Divisor(), ctx.q)
    return formats.read_divisor(_read(args.file), ctx.prec, ctx.q)


def _point(ctx: Context, text: str, label: str | None = None) -> lattice.PointSpec:
    alpha = formats.parse_scalar(text, ctx.prec)
    if alpha.is_zero():
        raise ParseError("points must be nonzero")
    return lattice.PointSpec.rational(lattice.to_fundamental(alpha, ctx.q), label)


def cmd_divisor(ctx: Context, args) -> dict:
    action = args.action
    if action == "construct":
        if args.alpha is None:
            raise ParseError("construct needs --alpha")
        avoid = _point(ctx, args.avoid) if args.avoid else None
        d = lattice.corollary_divisor(_point(ctx, args.alpha), args.i, ctx.q, avoid)
        return {"divisor": formats.divisor_to_json(d), "deg": _val(lattice.deg_q(d)),
                "principal": lattice.abel_jacobi_check(d)}
    d = _divisor(ctx, args)
    if action == "deg":
        return {"deg": _val(lattice.deg_q(d))}
    if action == "jacobi":
        c = lattice.jacobi_image(d)
        return {"representative": c.canonical.to_machine(), "is_one": c.is_one()}
    if action == "check":
        deg, cls, ok = curve.exact_sequence_check(d)
        return {"deg": _val(deg), "jacobi_is_one": cls.is_one(), "principal": ok}
    if action == "rr":
        return {"i": args.i, "dimension": lattice.rr_dimension(d, args.i)}
    if action == "synth":
        f = lattice.function_of_divisor(d.fundamental, ctx.prec)
        back = series.divisor_of(f, list(d.fundamental.terms))
        return {"num": f.num.to_machine(), "den": f.den.to_machine(),
                "verified": back == d.fundamental}
    raise ParseError(f"unknown divisor action {action!r}")


def cmd_theta(ctx: Context, args) -> dict:
    T = Fraction(args.T)
    th = lattice.theta_fundamental(ctx.q, T, ctx.prec, args.lattice)
    deg, mult, level = lattice.extract_degree_multiplicator(th.series, ctx.q)
    resid = lattice.functional_residual(th.series, ctx.q, th.degree, th.multiplicator)
    return {
        "T": _val(T), "lattice": args.lattice,
        "degree": _val(deg), "multiplicator": mult.truncate(level).to_machine(),
        "declared_degree": _val(th.degree),
        "multiplicator_class_ok": lattice.JacobiClass(mult, ctx.q, level)
        == lattice.JacobiClass(th.multiplicator, ctx.q, level),
        "level": _val(level), "residual_val": _val(resid),
    }


def cmd_pweier(ctx: Context, args) -> dict:
    x0 = formats.parse_scalar(args.x0, ctx.prec)
    j = None if args.mode == "integers" else (ctx.prec.imax if args.j is None else args.j)
    rep = curve.wp_diagnostic(x0, ctx.q, Fraction(args.T), j)
    return rep.as_dict()


def cmd_vectors(ctx: Context, args) -> dict:
    rng = vectors.rng_for(ctx.seed, args.kind)
    out = []
    for _ in range(args.count):
        if args.kind == "alpha":
            out.append(vectors.random_rational_alpha(rng, ctx.prec, ctx.q).to_machine())
        elif args.kind == "series":
            out.append(vectors.random_distinguished(rng, ctx.prec).to_machine())
        else:
            out.append(formats.divisor_to_json(vectors.random_small_divisor(rng, ctx.prec, ctx.q)))
    return {"kind": args.kind, "vectors": out}


COMMANDS = {"prepare": cmd_prepare, "cech": cmd_cech, "divisor": cmd_divisor,
            "theta": cmd_theta, "pweier": cmd_pweier, "vectors": cmd_vectors}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, default=2)
    common.add_argument("--imax", type=int, default=2)
    common.add_argument("--tprec", default="16")
    common.add_argument("--xdeg", default="8")
    common.add_argument("--q", default="t", help="text form of q (default t)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", choices=("text", "structured"), default="text")
    common.add_argument("--timing", action="store_true", help="add wall time to the report")

    ap = argparse.ArgumentParser(prog="perfectoid",
                                 description="Exact computations on the perfectoid Tate curve.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("prepare", parents=[common], help="Weierstrass preparation")
    sp.add_argument("file", nargs="?", help="series file (text or machine form), - for stdin")
    sp.add_argument("--series", help="series given inline in text form")
    sp.add_argument("--schedule", choices=("division", "hensel"), default="division")

    sp = sub.add_parser("cech", parents=[common], help="Cech cohomology of the Tate curve")
    sp.add_argument("--variant", default="plain", help="plain or unit-shifted:<n>")

    sp = sub.add_parser("divisor", parents=[common], help="divisor operations")
    sp.add_argument("action", choices=("deg", "jacobi", "check", "rr", "construct", "synth"))
    sp.add_argument("file", nargs="?", help="divisor file (JSON)")
    sp.add_argument("--i", type=int, default=0)
    sp.add_argument("--alpha")
    sp.add_argument("--avoid")

    sp = sub.add_parser("theta", parents=[common], help="fundamental theta function")
    sp.add_argument("--T", default="4")
    sp.add_argument("--lattice", choices=("integer", "full"), default="integer")

    sp = sub.add_parser("pweier", parents=[common], help="p-function convergence diagnostic")
    sp.add_argument("--mode", choices=("integers", "fractional"), default="integers")
    sp.add_argument("--T", default="8")
    sp.add_argument("--j", type=int)
    sp.add_argument("--x0", default="1 + t^(1/2)")

    sp = sub.add_parser("vectors", parents=[common], help="seeded test vectors")
    sp.add_argument("--kind", choices=("alpha", "series", "divisor"), default="alpha")
    sp.add_argument("--count", type=int, default=5)
    return ap


def _emit(report: dict, output: str, stream) -> None:
    if output == "structured":
        stream.write(json.dumps(report, sort_keys=True) + "\n")
        return
    stream.write(f"{report['command']}\n")
    for k, v in report["result"].items():
        stream.write(f"  {k}: {json.dumps(v) if isinstance(v, (list, dict)) else v}\n")


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    start = time.perf_counter()
    try:
        ctx = Context(args)
        result = COMMANDS[args.command](ctx, args)
    except ParseError as exc:
        stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except (PerfectoidError, ZeroDivisionError) as exc:
        stderr.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_KERNEL
    report = {"command": args.command, "config": ctx.config(), "result": result}
    if args.timing:
        report["wall_time"] = f"{time.perf_counter() - start:.6f}"
    _emit(report, args.output, stdout)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

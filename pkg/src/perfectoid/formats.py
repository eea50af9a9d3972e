"""Text and machine formats for scalars, series and divisor files.

Text input is a small expression language over the symbols ``t`` and ``X``::

    1 + t^(1/2) + 2*t^3        (scalar)
    X^5 + X^(1/4)              (series)
    (1*t^(0))*X^(1) + (1*t^(1/2))*X^(0)

Exponents are integers, ``a/b`` or ``(a/b)`` and must lie in the lattice
``(1/p**imax) Z``.  Machine forms are JSON: a scalar is ``[[num, den, digit], ...]``
and a series ``[[num, den, scalar], ...]``.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction

from .errors import ParseError
from .lattice import Divisor, PeriodicDivisor, PointSpec
from .scalar import Precision, Scalar, fmt_exp
from .series import PerfSeries

_TOKEN = re.compile(r"\s*(?:(\d+)|([tX])|(\*\*|[-+*^()/]))")


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r} at {pos}")
        out.append(m.group(m.lastindex).replace("**", "^"))
        pos = m.end()
    return out


# a polynomial is {(x exponent, t exponent): integer coefficient}

def _padd(a, b, sign=1):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + sign * v
    return {k: v for k, v in out.items() if v}


def _pmul(a, b):
    out: dict = {}
    for (xa, ta), va in a.items():
        for (xb, tb), vb in b.items():
            k = (xa + xb, ta + tb)
            out[k] = out.get(k, 0) + va * vb
    return {k: v for k, v in out.items() if v}


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        if not self.toks:
            raise ParseError("empty expression")

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise ParseError(f"expected {expected or 'a token'}, got {tok!r}")
        self.i += 1
        return tok

    def parse(self):
        poly = self.expr()
        if self.peek() is not None:
            raise ParseError(f"trailing input at {self.peek()!r}")
        return poly

    def expr(self):
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.take() == "-" else 1
        poly = self._scaled(self.term(), sign)
        while self.peek() in ("+", "-"):
            sign = -1 if self.take() == "-" else 1
            poly = _padd(poly, self.term(), sign)
        return poly

    @staticmethod
    def _scaled(poly, sign):
        return {k: sign * v for k, v in poly.items()}

    def term(self):
        poly = self.power()
        while self.peek() == "*":
            self.take()
            poly = _pmul(poly, self.power())
        return poly

    def exponent(self) -> Fraction:
        neg = False
        if self.peek() == "(":
            self.take()
            e = self.exponent()
            self.take(")")
            return e
        if self.peek() == "-":
            self.take()
            neg = True
        num = self.peek()
        if num is None or not num.isdigit():
            raise ParseError(f"bad exponent near {num!r}")
        self.take()
        e = Fraction(int(num))
        if self.peek() == "/":
            self.take()
            den = self.take()
            if not den.isdigit() or int(den) == 0:
                raise ParseError(f"bad exponent denominator {den!r}")
            e /= int(den)
        return -e if neg else e

    def power(self):
        tok = self.take()
        if tok.isdigit():
            base = {(Fraction(0), Fraction(0)): int(tok)}
            if self.peek() == "^":
                self.take()
                e = self.exponent()
                if e.denominator != 1 or e < 0:
                    raise ParseError("integer literals take non-negative integer powers")
                base = {(Fraction(0), Fraction(0)): int(tok) ** int(e)}
            return base
        if tok in ("t", "X"):
            e = Fraction(1)
            if self.peek() == "^":
                self.take()
                e = self.exponent()
            return {(e, Fraction(0)) if tok == "X" else (Fraction(0), e): 1}
        if tok == "(":
            inner = self.expr()
            self.take(")")
            if self.peek() == "^":
                self.take()
                e = self.exponent()
                if e.denominator != 1 or e < 0:
                    raise ParseError("grouped expressions take non-negative integer powers")
                out = {(Fraction(0), Fraction(0)): 1}
                for _ in range(int(e)):
                    out = _pmul(out, inner)
                return out
            return inner
        raise ParseError(f"unexpected token {tok!r}")


def _check_lattice(e: Fraction, prec: Precision, what: str) -> None:
    if not prec.in_lattice(e):
        raise ParseError(f"{what} exponent {e} is not in (1/{prec.denom})Z")


def _collect(poly, prec: Precision) -> dict[Fraction, dict[Fraction, int]]:
    out: dict[Fraction, dict[Fraction, int]] = {}
    for (xe, te), v in poly.items():
        _check_lattice(xe, prec, "X")
        _check_lattice(te, prec, "t")
        row = out.setdefault(xe, {})
        row[te] = row.get(te, 0) + v
    return out


def parse_scalar(text: str, prec: Precision) -> Scalar:
    rows = _collect(_Parser(text).parse(), prec)
    if any(xe != 0 for xe in rows):
        raise ParseError("a scalar may not mention X")
    return Scalar(prec, rows.get(Fraction(0), {}))


def parse_series(text: str, prec: Precision, window=None) -> PerfSeries:
    rows = _collect(_Parser(text).parse(), prec)
    return PerfSeries(prec, {xe: Scalar(prec, row) for xe, row in rows.items()}, window)


# -- machine forms -----------------------------------------------------------


def _frac(s) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ParseError(f"bad rational {s!r}") from exc


def scalar_from_machine(data, prec: Precision) -> Scalar:
    try:
        items = [(Fraction(int(a), int(b)), int(d)) for a, b, d in data]
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad scalar machine form {data!r}") from exc
    for e, _ in items:
        _check_lattice(e, prec, "t")
    return Scalar(prec, dict(items))


def series_from_machine(data, prec: Precision, window=None) -> PerfSeries:
    try:
        items = [(Fraction(int(a), int(b)), s) for a, b, s in data]
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad series machine form {data!r}") from exc
    coeffs = {}
    for e, s in items:
        _check_lattice(e, prec, "X")
        coeffs[e] = scalar_from_machine(s, prec)
    return PerfSeries(prec, coeffs, window)


def read_series(text: str, prec: Precision) -> PerfSeries:
    """Series from a file body: machine JSON if it parses as such, else text."""
    body = text.strip()
    if body.startswith("["):
        try:
            data = json.loads(body)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc}") from exc
        return series_from_machine(data, prec)
    return parse_series(body, prec)


def point_from_record(rec: dict, prec: Precision) -> tuple[PointSpec, Fraction]:
    try:
        label = str(rec["label"])
        absval = _frac(rec["absval"])
        norm = scalar_from_machine(rec["norm"], prec)
        mult = _frac(rec["mult"])
        deg = int(rec.get("deg_over_K", 1))
        insep = int(rec.get("insep_deg", 1))
    except KeyError as exc:
        raise ParseError(f"divisor record lacks field {exc}") from exc
    min_poly = rec.get("min_poly")
    if min_poly is not None:
        min_poly = series_from_machine(min_poly, prec)
    elif deg == 1 and insep == 1:
        min_poly = PointSpec.rational(norm).min_poly
    if not prec.in_lattice(mult):
        raise ParseError(f"multiplicity {mult} is not in (1/{prec.denom})Z")
    try:
        pt = PointSpec(label, absval, deg, norm, insep, min_poly)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    return pt, mult


def point_to_record(pt: PointSpec, mult: Fraction) -> dict:
    rec = {"label": pt.label, "absval": fmt_exp(pt.absval_exp), "deg_over_K": pt.deg_over_K,
           "insep_deg": pt.insep_deg, "norm": pt.norm.to_machine(), "mult": fmt_exp(mult)}
    if pt.min_poly is not None and not pt.is_rational:
        rec["min_poly"] = pt.min_poly.to_machine()
    return rec


def read_divisor(text: str, prec: Precision, q: Scalar | None = None) -> PeriodicDivisor:
    """Parse a divisor file.

    The body is either a JSON list of point records or an object
    ``{"q": scalar, "points": [...]}``; a ``q`` in the file overrides the
    argument, which defaults to t.
    """
    try:
        data = json.loads(text) if text.strip() else []
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad JSON: {exc}") from exc
    if isinstance(data, dict):
        if "q" in data:
            q = scalar_from_machine(data["q"], prec)
        records = data.get("points", [])
    elif isinstance(data, list):
        records = data
    else:
        raise ParseError("divisor file must hold a list or an object")
    if q is None:
        q = Scalar.t(1, prec)
    terms: dict[PointSpec, Fraction] = {}
    for rec in records:
        if not isinstance(rec, dict):
            raise ParseError(f"bad divisor record {rec!r}")
        pt, m = point_from_record(rec, prec)
        terms[pt] = terms.get(pt, Fraction(0)) + m
    try:
        return PeriodicDivisor(Divisor(terms), q)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def divisor_to_json(d: PeriodicDivisor) -> dict:
    return {"q": d.q.to_machine(),
            "points": [point_to_record(pt, m) for pt, m in
                       sorted(d.fundamental.terms.items(), key=lambda kv: kv[0].label)]}

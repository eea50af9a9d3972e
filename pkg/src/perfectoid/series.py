"""Series with exponents in Z[1/p]: the perfectoid Tate algebra and annuli.

A :class:`PerfSeries` is a finite truncation of ``sum a_n X^n`` with ``n``
in ``(1/p**imax) Z`` and coefficients :class:`Scalar`.  The admissible
exponent range is its *window*; products silently drop terms that fall
outside it and record that in :attr:`PerfSeries.truncated`.

Weierstrass preparation works by changing variables ``X^(1/p^i) -> Y`` so
the problem becomes the classical one for polynomials in ``Y`` with
integral coefficients, then changing back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import (
    Cancelled,
    LatticeOverflow,
    NonTermination,
    NotIntegral,
    NotNormalized,
    PrecisionMismatch,
    UnsupportedPoint,
    WindowMismatch,
    ZeroReduction,
)
from .scalar import INF, Precision, Scalar, _text_exp


# -- polynomial helpers on {int exponent: Scalar} ----------------------------
#
# These work on plain dicts; exponents are whatever integer indexing the caller
# uses (scaled X exponents or rescaled Y degrees).


def _clean(d: dict) -> dict:
    return {k: v for k, v in d.items() if not v.is_zero()}


def _padd(a: dict, b: dict, sign: int = 1) -> dict:
    out = dict(a)
    for k, v in b.items():
        if sign < 0:
            v = -v
        w = out[k] + v if k in out else v
        if w.is_zero():
            out.pop(k, None)
        else:
            out[k] = w
    return out


def _pmul(a: dict, b: dict, lo=None, hi=None) -> tuple[dict, bool]:
    acc: dict = {}
    dropped = False
    for ka, va in a.items():
        for kb, vb in b.items():
            k = ka + kb
            if (lo is not None and k < lo) or (hi is not None and k > hi):
                if not (va * vb).is_zero():
                    dropped = True
                continue
            prod = va * vb
            if k in acc:
                acc[k] = acc[k] + prod
            else:
                acc[k] = prod
    return _clean(acc), dropped


def _pdivmod(f: dict, g: dict) -> tuple[dict, dict]:
    """Euclidean division by ``g`` whose leading coefficient is a unit of R."""
    if not g:
        raise ZeroDivisionError("division by zero polynomial")
    dg = max(g)
    lead_inv = g[dg].inv()
    rem = dict(f)
    quo: dict = {}
    while rem:
        top = max(rem)
        if top < dg:
            break
        c = rem.pop(top) * lead_inv
        if c.is_zero():
            continue
        shift = top - dg
        quo[shift] = c
        for k, v in g.items():
            if k == dg:
                continue
            kk = k + shift
            w = rem[kk] - c * v if kk in rem else -(c * v)
            if w.is_zero():
                rem.pop(kk, None)
            else:
                rem[kk] = w
    return quo, rem


def _pval(d: dict):
    return min((v.valuation() for v in d.values()), default=INF)


# -- residue polynomials -----------------------------------------------------


class ResiduePoly:
    """Finitely supported polynomial over F_p with exponents in Z[1/p]."""

    def __init__(self, p: int, coeffs: Mapping[Fraction, int]):
        self.p = p
        self.coeffs = {Fraction(e): c % p for e, c in sorted(coeffs.items()) if c % p}

    def degree(self):
        return max(self.coeffs) if self.coeffs else -INF

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_unit(self) -> bool:
        return set(self.coeffs) == {Fraction(0)}

    def __eq__(self, other):
        if not isinstance(other, ResiduePoly):
            return NotImplemented
        return self.p == other.p and self.coeffs == other.coeffs

    def __repr__(self):
        if not self.coeffs:
            return "0"
        return " + ".join(f"{c}*X^({_text_exp(e)})" for e, c in self.coeffs.items())


# -- series ------------------------------------------------------------------


class PerfSeries:
    """A truncated element of ``K<X>_inf`` or of an annulus ring.

    ``window=(lo, hi)`` bounds the support; ``lo = 0`` is the Tate algebra
    proper.  Coefficients are kept in a dict keyed by ``n * p**imax``.
    """

    __slots__ = ("prec", "_c", "lo", "hi", "truncated")

    def __init__(self, prec: Precision, coeffs: Mapping | None = None, window=None):
        self.prec = prec
        lo, hi = window if window is not None else (0, prec.xdeg)
        self.lo, self.hi = Fraction(lo), Fraction(hi)
        if self.lo > self.hi:
            raise WindowMismatch(f"empty window [{lo}, {hi}]")
        self.truncated = False
        c: dict[int, Scalar] = {}
        for e, v in (coeffs or {}).items():
            e = Fraction(e)
            k = prec.scale(e)
            if not self.lo <= e <= self.hi:
                raise WindowMismatch(f"exponent {e} outside window [{self.lo}, {self.hi}]")
            v = Scalar.coerce(v, prec)
            c[k] = c[k] + v if k in c else v
        self._c = _clean(c)

    @classmethod
    def _raw(cls, prec, c, lo, hi, truncated=False) -> "PerfSeries":
        s = cls.__new__(cls)
        s.prec, s._c, s.lo, s.hi, s.truncated = prec, c, lo, hi, truncated
        return s

    @classmethod
    def annulus(cls, prec: Precision, coeffs: Mapping | None = None) -> "PerfSeries":
        return cls(prec, coeffs, (-prec.xdeg, prec.xdeg))

    @classmethod
    def constant(cls, c, prec: Precision, window=None) -> "PerfSeries":
        return cls(prec, {0: Scalar.coerce(c, prec)}, window)

    @classmethod
    def monomial(cls, e, c, prec: Precision, window=None) -> "PerfSeries":
        return cls(prec, {Fraction(e): Scalar.coerce(c, prec)}, window)

    @property
    def window(self) -> tuple[Fraction, Fraction]:
        return self.lo, self.hi

    def with_window(self, lo, hi) -> "PerfSeries":
        lo, hi = Fraction(lo), Fraction(hi)
        d = self.prec.denom
        if any(not lo * d <= k <= hi * d for k in self._c):
            raise WindowMismatch("support does not fit the new window")
        return PerfSeries._raw(self.prec, dict(self._c), lo, hi, self.truncated)

    # -- inspection --

    @property
    def coeffs(self) -> dict[Fraction, Scalar]:
        return {self.prec.unscale(k): v for k, v in sorted(self._c.items())}

    def coeff(self, e) -> Scalar:
        return self._c.get(self.prec.scale(e), Scalar.zero(self.prec))

    def support(self) -> list[Fraction]:
        return [self.prec.unscale(k) for k in sorted(self._c)]

    def is_zero(self) -> bool:
        return not self._c

    def gauss_val(self):
        """``-log_p`` of the Gauss norm: the least coefficient valuation."""
        return _pval(self._c)

    def gauss_norm(self) -> Fraction:
        v = self.gauss_val()
        if v == INF:
            return Fraction(0)
        # |a| = p^(-val a); a fractional valuation gives an irrational norm,
        # so only integral valuations are returned exactly
        if Fraction(v).denominator != 1:
            raise ValueError(f"Gauss norm p^({-v}) is irrational; use gauss_val()")
        return Fraction(self.prec.p) ** (-int(v))

    def reduce(self) -> ResiduePoly:
        if self.gauss_val() < 0:
            raise NotIntegral("Gauss norm exceeds 1")
        return ResiduePoly(self.prec.p, {self.prec.unscale(k): v.reduce()
                                         for k, v in self._c.items()})

    def is_unit(self) -> bool:
        if self.gauss_val() != 0:
            raise NotNormalized("is_unit needs Gauss norm exactly 1")
        return self.reduce().is_unit()

    def distinguished_order(self) -> Fraction:
        if self.gauss_val() != 0:
            raise NotNormalized("distinguished order needs Gauss norm exactly 1")
        red = self.reduce()
        if red.is_zero():
            raise ZeroReduction("reduction vanishes")
        return red.degree()

    def truncate(self, level) -> "PerfSeries":
        """Drop coefficient terms with t-exponent >= level."""
        c = _clean({k: v.truncate(level) for k, v in self._c.items()})
        return PerfSeries._raw(self.prec, c, self.lo, self.hi, self.truncated)

    # -- ring operations --

    def _combine_window(self, other: "PerfSeries") -> tuple[Fraction, Fraction]:
        if other.prec != self.prec:
            raise PrecisionMismatch(f"{self.prec} != {other.prec}")
        if self.lo <= other.lo and other.hi <= self.hi:
            return self.lo, self.hi
        if other.lo <= self.lo and self.hi <= other.hi:
            return other.lo, other.hi
        raise WindowMismatch(f"windows {self.window} and {other.window} are not nested")

    def _lift(self, other) -> "PerfSeries":
        if isinstance(other, PerfSeries):
            return other
        if isinstance(other, (int, Scalar)):
            return PerfSeries.constant(Scalar.coerce(other, self.prec), self.prec,
                                       (min(self.lo, 0), max(self.hi, 0)))
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        lo, hi = self._combine_window(other)
        return PerfSeries._raw(self.prec, _padd(self._c, other._c), lo, hi,
                               self.truncated or other.truncated)

    __radd__ = __add__

    def __neg__(self):
        return PerfSeries._raw(self.prec, {k: -v for k, v in self._c.items()},
                               self.lo, self.hi, self.truncated)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        lo, hi = self._combine_window(other)
        return PerfSeries._raw(self.prec, _padd(self._c, other._c, -1), lo, hi,
                               self.truncated or other.truncated)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Scalar)):
            s = Scalar.coerce(other, self.prec)
            return PerfSeries._raw(self.prec, _clean({k: v * s for k, v in self._c.items()}),
                                   self.lo, self.hi, self.truncated)
        if not isinstance(other, PerfSeries):
            return NotImplemented
        lo, hi = self._combine_window(other)
        d = self.prec.denom
        c, dropped = _pmul(self._c, other._c, lo * d, hi * d)
        return PerfSeries._raw(self.prec, c, lo, hi,
                               dropped or self.truncated or other.truncated)

    __rmul__ = __mul__

    def __pow__(self, m):
        m = Fraction(m)
        r = self
        den = m.denominator
        while den % self.prec.p == 0:
            r = r.pth_root()
            den //= self.prec.p
        if den != 1:
            raise LatticeOverflow(f"exponent {m} not in Z[1/p]")
        n = m.numerator
        if n < 0:
            raise ValueError("negative powers of series are rational functions")
        out = PerfSeries.constant(1, self.prec, (min(self.lo, 0), max(self.hi, 0)))
        base = r
        while n:
            if n % self.prec.p == 0:
                base = base.frobenius()
                n //= self.prec.p
            else:
                out = out * base
                n -= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, PerfSeries):
            return NotImplemented
        return self.prec == other.prec and self._c == other._c

    def __hash__(self):
        return hash((self.prec, tuple(sorted(self._c.items()))))

    # -- Frobenius and exponent changes --

    def frobenius(self) -> "PerfSeries":
        """``self**p``: coefficientwise Frobenius, exponents times p."""
        p, d = self.prec.p, self.prec.denom
        c, dropped = {}, False
        for k, v in self._c.items():
            kk = k * p
            if not self.lo * d <= kk <= self.hi * d:
                dropped = True
                continue
            fv = v.frobenius()
            if not fv.is_zero():
                c[kk] = fv
        return PerfSeries._raw(self.prec, c, self.lo, self.hi, dropped or self.truncated)

    def pth_root(self) -> "PerfSeries":
        p = self.prec.p
        if any(k % p for k in self._c):
            raise LatticeOverflow("p-th root leaves the X-exponent lattice")
        c = {k // p: v.pth_root() for k, v in self._c.items()}
        return PerfSeries._raw(self.prec, c, self.lo, self.hi, self.truncated)

    def rescale(self, i: int) -> "PerfSeries":
        """Substitute ``X -> X^(p^i)``; ``i < 0`` undoes an earlier rescale.

        The window scales with the exponents, so a rescaled series may exceed
        ``xdeg``; it lives in the ring of the new variable.
        """
        p = self.prec.p
        if i >= 0:
            f = p**i
            c = {k * f: v for k, v in self._c.items()}
            return PerfSeries._raw(self.prec, c, self.lo * f, self.hi * f, self.truncated)
        f = p ** (-i)
        if any(k % f for k in self._c):
            raise LatticeOverflow(f"rescale by p^{i} leaves the exponent lattice")
        c = {k // f: v for k, v in self._c.items()}
        return PerfSeries._raw(self.prec, c, self.lo / f, self.hi / f, self.truncated)

    def shift(self, e) -> "PerfSeries":
        """Multiply by the monomial ``X**e`` (the window moves along)."""
        e = Fraction(e)
        s = self.prec.scale(e)
        c = {k + s: v for k, v in self._c.items()}
        return PerfSeries._raw(self.prec, c, self.lo + e, self.hi + e, self.truncated)

    def scale_variable(self, c: Scalar) -> "PerfSeries":
        """The series ``f(c X)``: coefficient of ``X^n`` times ``c**n``."""
        out = {}
        cache: dict[Fraction, Scalar] = {}
        for k, v in self._c.items():
            n = self.prec.unscale(k)
            if n not in cache:
                cache[n] = c**n
            w = v * cache[n]
            if not w.is_zero():
                out[k] = w
        return PerfSeries._raw(self.prec, out, self.lo, self.hi, self.truncated)

    def evaluate(self, x: Scalar) -> Scalar:
        """Sum ``a_n x**n`` at a scalar point."""
        total = Scalar.zero(self.prec)
        for k, v in self._c.items():
            total = total + v * x ** self.prec.unscale(k)
        return total

    def lcd_level(self) -> int:
        """Least ``i`` such that every exponent times ``p**i`` is an integer."""
        p, imax, d = self.prec.p, self.prec.imax, self.prec.denom
        for i in range(imax + 1):
            f = p**i
            if all((k * f) % d == 0 for k in self._c):
                return i
        return imax

    def to_ypoly(self, i: int) -> dict[int, Scalar]:
        """Integer-degree polynomial in ``Y = X^(1/p^i)``."""
        d, f = self.prec.denom, self.prec.p**i
        out = {}
        for k, v in self._c.items():
            if (k * f) % d:
                raise LatticeOverflow(f"exponent {k}/{d} not in (1/p^{i})Z")
            out[k * f // d] = v
        return out

    @classmethod
    def from_ypoly(cls, poly: dict[int, Scalar], i: int, prec: Precision, window=None):
        d, f = prec.denom, prec.p**i
        c = {}
        for y, v in poly.items():
            k = Fraction(y * d, f)
            if k.denominator != 1:
                raise LatticeOverflow("degree does not map back into the lattice")
            c[k.numerator] = v
        if window is None:
            hi = max([Fraction(k, d) for k in c], default=Fraction(0))
            window = (Fraction(0), max(hi, prec.xdeg))
        return cls._raw(prec, _clean(c), Fraction(window[0]), Fraction(window[1]))

    # -- formatting --

    def __str__(self):
        if not self._c:
            return "0"
        return " + ".join(f"({v})*X^({_text_exp(e)})" for e, v in self.coeffs.items())

    __repr__ = __str__

    def to_machine(self) -> list:
        return [[e.numerator, e.denominator, v.to_machine()] for e, v in self.coeffs.items()]

    @classmethod
    def from_machine(cls, data: Iterable, prec: Precision, window=None) -> "PerfSeries":
        return cls(prec, {Fraction(int(a), int(b)): Scalar.from_machine(s, prec)
                          for a, b, s in data}, window)


def gauss_norm(f: PerfSeries) -> Fraction:
    return f.gauss_norm()


def reduce_series(f: PerfSeries) -> ResiduePoly:
    return f.reduce()


def is_unit(f: PerfSeries) -> bool:
    return f.is_unit()


def distinguished_order(f: PerfSeries) -> Fraction:
    return f.distinguished_order()


def rescale_exponents(f: PerfSeries, i: int) -> PerfSeries:
    return f.rescale(i)


def pth_root_series(f: PerfSeries) -> PerfSeries:
    return f.pth_root()


# -- Weierstrass preparation -------------------------------------------------


@dataclass(frozen=True)
class PreparedForm:
    unit: PerfSeries
    monic: PerfSeries
    order: Fraction
    level: int  # exponents were rescaled by p**level
    iterations: int


def _division_schedule(G, S, cap, cancel):
    # Y^S = Q*G + R by repeated division by the part of G up to degree S;
    # the monic factor is then Y^S - R
    A = {k: v for k, v in G.items() if k <= S}
    B = {k: v for k, v in G.items() if k > S}
    prec = G[S].prec
    f = {S: Scalar.one(prec)}
    R: dict = {}
    it = 0
    while f:
        if cancel is not None and cancel.is_set():
            raise Cancelled("preparation cancelled")
        it += 1
        if it > cap:
            raise NonTermination(f"no convergence after {cap} iterations")
        q, r = _pdivmod(f, A)
        R = _padd(R, r)
        f, _ = _pmul(q, B)
        f = {k: -v for k, v in f.items()}
    H = {k: -v for k, v in R.items()}
    H[S] = Scalar.one(prec)
    return H, it


def _hensel_schedule(G, S, cap, cancel):
    # refine a factorisation u*h: split the error by division by h, put
    # the quotient into u and the remainder (scaled) into h
    lead = G[S]
    lead_inv = lead.inv()
    h = {k: v * lead_inv for k, v in G.items() if k <= S}
    u = {0: lead}
    it = 0
    while True:
        if cancel is not None and cancel.is_set():
            raise Cancelled("preparation cancelled")
        uh, _ = _pmul(u, h)
        err = _padd(G, uh, -1)
        if not err:
            return h, it
        it += 1
        if it > cap:
            raise NonTermination(f"no convergence after {cap} iterations")
        du, r = _pdivmod(err, h)
        u = _padd(u, du)
        c0 = u.get(0)
        if c0 is None or c0.valuation() != 0:
            raise NotNormalized("unit factor lost its unit constant term")
        c0inv = c0.inv()
        h = _padd(h, {k: v * c0inv for k, v in r.items()})


def weierstrass_prepare(g: PerfSeries, schedule: str = "division", cancel=None,
                        max_iter: int | None = None) -> PreparedForm:
    """Factor a norm-one ``g`` as ``unit * monic`` with ``deg monic`` = order.

    ``schedule`` selects the iteration ("division" or "hensel"); both agree
    modulo ``t**tprec``.  ``cancel`` is an optional object with ``is_set()``
    (e.g. ``threading.Event``) polled once per iteration.
    """
    prec = g.prec
    if g.is_zero() or g.gauss_val() != 0:
        raise NotNormalized("weierstrass_prepare needs Gauss norm exactly 1")
    if g.support()[0] < 0:
        raise NotNormalized("negative exponents: shift into K<X>_inf first")
    s = g.distinguished_order()
    i = g.lcd_level()
    G = g.to_ypoly(i)
    S = int(s * prec.p**i)
    cap = max_iter if max_iter is not None else 64 * math.ceil(prec.tprec) * prec.denom
    if S == 0:
        H, it = {0: Scalar.one(prec)}, 0
    elif schedule == "division":
        H, it = _division_schedule(G, S, cap, cancel)
    elif schedule == "hensel":
        H, it = _hensel_schedule(G, S, cap, cancel)
    else:
        raise ValueError(f"unknown schedule {schedule!r}")
    U, rem = _pdivmod(G, H)
    if rem:
        raise NonTermination("monic factor does not divide g at working precision")
    window = (Fraction(0), max(g.hi, s))
    return PreparedForm(
        unit=PerfSeries.from_ypoly(U, i, prec, window),
        monic=PerfSeries.from_ypoly(H, i, prec, window),
        order=s,
        level=i,
        iterations=it,
    )


# -- rational functions, orders and divisors ---------------------------------


class RationalFn:
    """A quotient ``num / den`` of series; equality by cross-multiplication."""

    __slots__ = ("num", "den")

    def __init__(self, num: PerfSeries, den: PerfSeries | None = None):
        if den is None:
            den = PerfSeries.constant(1, num.prec, num.window)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        self.num, self.den = num, den

    @property
    def prec(self) -> Precision:
        return self.num.prec

    def __mul__(self, other):
        if isinstance(other, PerfSeries):
            other = RationalFn(other)
        if not isinstance(other, RationalFn):
            return NotImplemented
        return RationalFn(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, PerfSeries):
            other = RationalFn(other)
        if not isinstance(other, RationalFn):
            return NotImplemented
        return RationalFn(self.num * other.den, self.den * other.num)

    def __pow__(self, m):
        m = Fraction(m)
        if m < 0:
            return RationalFn(self.den ** (-m), self.num ** (-m))
        return RationalFn(self.num**m, self.den**m)

    def pth_root(self) -> "RationalFn":
        return RationalFn(self.num.pth_root(), self.den.pth_root())

    def __eq__(self, other):
        if not isinstance(other, RationalFn):
            return NotImplemented
        return (self.num * other.den - other.num * self.den).is_zero()

    __hash__ = None

    def __repr__(self):
        return f"({self.num}) / ({self.den})"


def _normalize(g: PerfSeries) -> PerfSeries:
    """Shift to least exponent 0 and scale to Gauss norm 1."""
    g = g.shift(-g.support()[0])
    v = g.gauss_val()
    return g * Scalar.t(-v, g.prec)


def _series_ord(g: PerfSeries, phi: PerfSeries):
    if g.is_zero():
        return INF
    prepared = weierstrass_prepare(_normalize(g))
    i = prepared.level
    psi_x = phi
    for _ in range(i):
        psi_x = psi_x.pth_root()
    psi = psi_x.rescale(i).to_ypoly(0)
    if not psi or max(psi) == 0:
        raise UnsupportedPoint("minimal polynomial must have positive degree")
    if psi[max(psi)] != Scalar.one(g.prec):
        raise UnsupportedPoint("minimal polynomial must be monic")
    H = prepared.monic.to_ypoly(i)
    count = 0
    while H and max(H) >= max(psi):
        quo, rem = _pdivmod(H, psi)
        if rem:
            break
        H = quo
        count += 1
    return Fraction(count, g.prec.p**i)


def _min_poly(pt) -> PerfSeries:
    if isinstance(pt, PerfSeries):
        return pt
    phi = getattr(pt, "min_poly", None)
    if phi is None:
        raise UnsupportedPoint(f"no minimal polynomial for point {getattr(pt, 'label', pt)}")
    return phi


def ord_at(f, pt):
    """Order of vanishing of ``f`` at the point (``+inf`` for ``f = 0``)."""
    if isinstance(f, PerfSeries):
        f = RationalFn(f)
    phi = _min_poly(pt)
    if f.num.is_zero():
        return INF
    return _series_ord(f.num, phi) - _series_ord(f.den, phi)


def divisor_of(f, pts):
    from .lattice import Divisor

    terms = {}
    for pt in pts:
        m = ord_at(f, pt)
        if m == INF:
            raise ZeroDivisionError("divisor of the zero function is undefined")
        if m:
            terms[pt] = m
    return Divisor(terms)

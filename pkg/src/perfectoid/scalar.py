"""Truncated arithmetic in the perfection of F_p((t)).

A :class:`Scalar` is a finitely supported sum ``sum c_e t^e`` with digits
``c_e`` in ``[1, p)`` and exponents ``e`` in ``(1/p**imax) Z``, known modulo
``t**tprec``.  Internally exponents are stored multiplied by ``p**imax`` so
that every operation runs on plain integers.

Arithmetic is carry-free (characteristic p), which makes Frobenius a
bijection: ``pth_root`` just divides every exponent by p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import (
    BadModulus,
    DivisionByZero,
    LatticeOverflow,
    NotIntegral,
    PrecisionMismatch,
)

INF = math.inf


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % k for k in range(2, math.isqrt(n) + 1))


@dataclass(frozen=True)
class Precision:
    """Truncation parameters shared by all values of one computation.

    ``p`` is the characteristic, exponent denominators divide ``p**imax``,
    scalars are kept modulo ``t**tprec`` and X-exponents are bounded by
    ``xdeg`` in absolute value.
    """

    p: int = 2
    imax: int = 2
    tprec: Fraction = Fraction(16)
    xdeg: Fraction = Fraction(8)

    def __post_init__(self):
        object.__setattr__(self, "tprec", Fraction(self.tprec))
        object.__setattr__(self, "xdeg", Fraction(self.xdeg))
        if not _is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.imax < 0:
            raise ValueError("imax must be non-negative")
        if self.tprec <= 0 or self.xdeg <= 0:
            raise ValueError("tprec and xdeg must be positive")

    @property
    def denom(self) -> int:
        return self.p**self.imax

    @property
    def limit(self) -> int:
        """Scaled exponents ``e`` are kept iff ``e < limit``."""
        return math.ceil(self.tprec * self.denom)

    def scale(self, e) -> int:
        """Map an exponent to its integer lattice index, checking the lattice."""
        e = Fraction(e)
        s = e * self.denom
        if s.denominator != 1:
            raise LatticeOverflow(f"exponent {e} not in (1/{self.denom})Z")
        return s.numerator

    def unscale(self, k: int) -> Fraction:
        return Fraction(k, self.denom)

    def in_lattice(self, e) -> bool:
        return (Fraction(e) * self.denom).denominator == 1

    def lattice(self, lo, hi) -> list[Fraction]:
        """All lattice exponents in the closed interval [lo, hi], increasing."""
        a = math.ceil(Fraction(lo) * self.denom)
        b = math.floor(Fraction(hi) * self.denom)
        return [Fraction(k, self.denom) for k in range(a, b + 1)]

    def as_dict(self) -> dict:
        return {"p": self.p, "imax": self.imax,
                "tprec": _fmt(self.tprec), "xdeg": _fmt(self.xdeg)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "Precision":
        return cls(int(d["p"]), int(d["imax"]),
                   Fraction(str(d["tprec"])), Fraction(str(d["xdeg"])))


def _fmt(e: Fraction) -> str:
    e = Fraction(e)
    return f"{e.numerator}/{e.denominator}"


def _text_exp(e: Fraction) -> str:
    return str(e.numerator) if e.denominator == 1 else f"{e.numerator}/{e.denominator}"


def fmt_exp(e) -> str:
    """Render an exponent (or infinity) in the ``a/b`` lattice encoding."""
    if e == INF:
        return "inf"
    return _fmt(Fraction(e))


class Scalar:
    """Element of the truncated model field K.

    >>> P = Precision(2, 2, 4, 8)
    >>> (Scalar.one(P) + Scalar.t(1, P)).inv()
    1*t^(0) + 1*t^(1) + 1*t^(2) + 1*t^(3)
    """

    __slots__ = ("prec", "_c", "_hash")

    def __init__(self, prec: Precision, digits: Mapping | None = None):
        self.prec = prec
        c: dict[int, int] = {}
        if digits:
            for e, d in digits.items():
                k = prec.scale(e)
                d = int(d) % prec.p
                if d and k < prec.limit:
                    c[k] = (c.get(k, 0) + d) % prec.p
        self._c = {k: d for k, d in c.items() if d}
        self._hash = None

    @classmethod
    def _raw(cls, prec: Precision, c: dict[int, int]) -> "Scalar":
        # c must already be canonical (digits in [1, p), keys < limit)
        s = cls.__new__(cls)
        s.prec = prec
        s._c = c
        s._hash = None
        return s

    @classmethod
    def zero(cls, prec: Precision) -> "Scalar":
        return cls._raw(prec, {})

    @classmethod
    def one(cls, prec: Precision) -> "Scalar":
        return cls.from_int(1, prec)

    @classmethod
    def from_int(cls, n: int, prec: Precision) -> "Scalar":
        d = n % prec.p
        return cls._raw(prec, {0: d} if d and 0 < prec.limit else {})

    @classmethod
    def t(cls, e, prec: Precision, digit: int = 1) -> "Scalar":
        """The monomial ``digit * t**e``."""
        return cls(prec, {Fraction(e): digit})

    @classmethod
    def coerce(cls, x, prec: Precision) -> "Scalar":
        if isinstance(x, Scalar):
            if x.prec != prec:
                raise PrecisionMismatch(f"{x.prec} != {prec}")
            return x
        if isinstance(x, int):
            return cls.from_int(x, prec)
        raise TypeError(f"cannot coerce {type(x).__name__} to Scalar")

    # -- inspection -------------------------------------------------------

    @property
    def digits(self) -> dict[Fraction, int]:
        return {self.prec.unscale(k): d for k, d in sorted(self._c.items())}

    def terms(self) -> list[tuple[Fraction, int]]:
        return [(self.prec.unscale(k), d) for k, d in sorted(self._c.items())]

    def is_zero(self) -> bool:
        return not self._c

    def __bool__(self) -> bool:
        return bool(self._c)

    def valuation(self):
        """Smallest exponent in the support; ``INF`` for zero."""
        if not self._c:
            return INF
        return self.prec.unscale(min(self._c))

    def _scaled_val(self):
        return min(self._c) if self._c else INF

    def leading(self) -> tuple[Fraction, int]:
        k = min(self._c)
        return self.prec.unscale(k), self._c[k]

    def reduce(self) -> int:
        """Image in the residue field F_p."""
        if self._c and min(self._c) < 0:
            raise NotIntegral(f"valuation {self.valuation()} < 0")
        return self._c.get(0, 0)

    def truncate(self, level) -> "Scalar":
        """Drop every term with exponent >= level."""
        if level == INF:
            return self
        lim = math.ceil(Fraction(level) * self.prec.denom)
        return Scalar._raw(self.prec, {k: d for k, d in self._c.items() if k < lim})

    def shift(self, e) -> "Scalar":
        """Multiply by ``t**e``."""
        s = self.prec.scale(e)
        lim = self.prec.limit
        return Scalar._raw(self.prec, {k + s: d for k, d in self._c.items() if k + s < lim})

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "Scalar") -> None:
        if other.prec != self.prec:
            raise PrecisionMismatch(f"{self.prec} != {other.prec}")

    def __add__(self, other):
        if isinstance(other, int):
            other = Scalar.from_int(other, self.prec)
        elif not isinstance(other, Scalar):
            return NotImplemented
        self._check(other)
        p = self.prec.p
        c = dict(self._c)
        for k, d in other._c.items():
            v = (c.get(k, 0) + d) % p
            if v:
                c[k] = v
            else:
                c.pop(k, None)
        return Scalar._raw(self.prec, c)

    __radd__ = __add__

    def __neg__(self):
        p = self.prec.p
        return Scalar._raw(self.prec, {k: p - d for k, d in self._c.items()})

    def __sub__(self, other):
        if isinstance(other, int):
            other = Scalar.from_int(other, self.prec)
        elif not isinstance(other, Scalar):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            d = other % self.prec.p
            if not d:
                return Scalar.zero(self.prec)
            p = self.prec.p
            return Scalar._raw(self.prec, {k: v * d % p for k, v in self._c.items()})
        if not isinstance(other, Scalar):
            return NotImplemented
        self._check(other)
        a, b = self._c, other._c
        if not a or not b:
            return Scalar.zero(self.prec)
        if len(a) < len(b):
            a, b = b, a
        lim = self.prec.limit
        p = self.prec.p
        acc: dict[int, int] = {}
        bs = sorted(b.items())
        for ka, da in a.items():
            room = lim - ka
            for kb, db in bs:
                if kb >= room:
                    break
                k = ka + kb
                acc[k] = acc.get(k, 0) + da * db
        return Scalar._raw(self.prec, {k: v % p for k, v in acc.items() if v % p})

    __rmul__ = __mul__

    def inv(self) -> "Scalar":
        if not self._c:
            raise DivisionByZero("scalar is zero at working precision")
        p = self.prec.p
        v = min(self._c)
        c0inv = pow(self._c[v], -1, p)
        # unit part 1 + w with w of positive valuation
        w = sorted((k - v, d * c0inv % p) for k, d in self._c.items() if k != v)
        n = self.prec.limit + v  # need result indices j with j - v < limit
        r = [0] * max(n, 0)
        if n > 0:
            r[0] = 1
        for j in range(1, n):
            s = 0
            for e, d in w:
                if e > j:
                    break
                s += d * r[j - e]
            r[j] = (-s) % p
        return Scalar._raw(self.prec, {j - v: rj * c0inv % p for j, rj in enumerate(r) if rj})

    def __truediv__(self, other):
        if isinstance(other, int):
            other = Scalar.from_int(other, self.prec)
        elif not isinstance(other, Scalar):
            return NotImplemented
        return self * other.inv()

    def __rtruediv__(self, other):
        return Scalar.coerce(other, self.prec) * self.inv()

    def frobenius(self) -> "Scalar":
        """``self**p``: exponents times p, digits fixed (d**p = d in F_p)."""
        p, lim = self.prec.p, self.prec.limit
        return Scalar._raw(self.prec, {k * p: d for k, d in self._c.items() if k * p < lim})

    def pth_root(self) -> "Scalar":
        p = self.prec.p
        if any(k % p for k in self._c):
            raise LatticeOverflow("p-th root leaves the exponent lattice")
        return Scalar._raw(self.prec, {k // p: d for k, d in self._c.items()})

    def __pow__(self, m):
        m = Fraction(m)
        if m.denominator != 1:
            r = self
            den = m.denominator
            while den % self.prec.p == 0:
                r = r.pth_root()
                den //= self.prec.p
            if den != 1:
                raise LatticeOverflow(f"exponent {m} not in Z[1/p]")
            return r ** m.numerator
        n = m.numerator
        if n < 0:
            return self.inv() ** (-n)
        result = Scalar.one(self.prec)
        base = self
        while n:
            if n % self.prec.p == 0 and n >= self.prec.p:
                # cheap p-power step
                base = base.frobenius()
                n //= self.prec.p
                continue
            n -= 1
            result = result * base
        return result

    # -- comparison, hashing, formatting ---------------------------------

    def __eq__(self, other):
        if isinstance(other, int):
            other = Scalar.from_int(other, self.prec)
        if not isinstance(other, Scalar):
            return NotImplemented
        return self.prec == other.prec and self._c == other._c

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.prec, tuple(sorted(self._c.items()))))
        return self._hash

    def __str__(self):
        if not self._c:
            return "0"
        return " + ".join(f"{d}*t^({_text_exp(e)})" for e, d in self.terms())

    __repr__ = __str__

    def to_machine(self) -> list[list[int]]:
        return [[e.numerator, e.denominator, d] for e, d in self.terms()]

    @classmethod
    def from_machine(cls, data: Iterable, prec: Precision) -> "Scalar":
        return cls(prec, {Fraction(int(a), int(b)): int(d) for a, b, d in data})


def pth_root(a: Scalar) -> Scalar:
    return a.pth_root()


def valuation(a: Scalar):
    return a.valuation()


def reduce_scalar(a: Scalar) -> int:
    return a.reduce()


def q_power_class(a: Scalar, b: Scalar, q: Scalar, level=None):
    """Return m in Z[1/p] with ``a / b == q**m`` at precision, else ``None``.

    The candidate is forced by valuations, ``m = val(a/b) / val(q)``.  The
    identity is checked without dividing, by moving the q-power to whichever
    side keeps every factor integral-shifted: ``a == b*q**m`` for m >= 0 and
    ``a*q**(-m) == b`` otherwise.  ``level`` restricts the comparison to
    exponents below that bound (for inputs only known to lower precision).
    """
    if q.is_zero() or not q.valuation() > 0:
        raise BadModulus("need 0 < |q| < 1")
    if a.is_zero() or b.is_zero():
        raise DivisionByZero("q_power_class needs nonzero arguments")
    m = (a.valuation() - b.valuation()) / q.valuation()
    prec = a.prec
    if not prec.in_lattice(m):
        return None
    try:
        qm = q ** abs(m)
    except LatticeOverflow:
        return None
    lhs, rhs = (a, b * qm) if m >= 0 else (a * qm, b)
    hi = prec.tprec if level is None else min(Fraction(level), prec.tprec)
    # both sides carry absolute precision tprec; nothing above hi is compared
    if (lhs - rhs).truncate(hi).is_zero():
        return m
    return None


def parse_scalar(text: str, prec: Precision) -> Scalar:
    from .formats import parse_scalar as _parse

    return _parse(text, prec)

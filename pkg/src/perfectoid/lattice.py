"""Divisors with Z[1/p] multiplicities, theta functions and Abel-Jacobi.

Points are described by the data the degree and Jacobi-image formulas
consume (degree over K, norm, absolute value, inseparability degree).  Only
K-rational points carry a usable minimal polynomial, so only they take part
in series-level constructions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import (
    BadModulus,
    DenominatorMismatch,
    LatticeOverflow,
    NotTheta,
    PoolExhausted,
    UnsupportedPoint,
)
from .scalar import INF, Precision, Scalar, q_power_class
from .series import PerfSeries, RationalFn


@dataclass(frozen=True, eq=False)
class PointSpec:
    """A point of G_m over an algebraic closure of K, up to conjugacy.

    ``absval_exp`` is the valuation of the point, so ``|alpha| = p**-absval_exp``.
    """

    label: str
    absval_exp: Fraction
    deg_over_K: int
    norm: Scalar
    insep_deg: int = 1
    min_poly: PerfSeries | None = None

    def __post_init__(self):
        object.__setattr__(self, "absval_exp", Fraction(self.absval_exp))
        if self.deg_over_K < 1 or self.insep_deg < 1:
            raise ValueError("degrees must be positive")
        if self.norm.is_zero():
            raise ValueError("points of G_m have nonzero norm")
        if self.norm.valuation() != self.deg_over_K * self.absval_exp:
            raise ValueError("val(norm) must equal deg_over_K * absval_exp")

    @classmethod
    def rational(cls, alpha: Scalar, label: str | None = None) -> "PointSpec":
        if alpha.is_zero():
            raise ValueError("0 is not a point of G_m")
        prec = alpha.prec
        window = (Fraction(0), max(prec.xdeg, Fraction(1)))
        phi = PerfSeries(prec, {1: 1, 0: -alpha}, window)
        return cls(label if label is not None else str(alpha), alpha.valuation(),
                   1, alpha, 1, phi)

    @property
    def is_rational(self) -> bool:
        return self.deg_over_K == 1 and self.insep_deg == 1

    @property
    def value(self) -> Scalar:
        if not self.is_rational:
            raise UnsupportedPoint(f"point {self.label} is not K-rational")
        return self.norm

    def _key(self):
        return (self.label, self.absval_exp, self.deg_over_K, self.insep_deg, self.norm)

    def __eq__(self, other):
        if not isinstance(other, PointSpec):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"[{self.label}]"


class Divisor:
    """Finite formal sum of points with multiplicities in Z[1/p]."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[PointSpec, Fraction] | None = None):
        t: dict[PointSpec, Fraction] = {}
        for pt, m in (terms or {}).items():
            m = Fraction(m)
            p = pt.norm.prec.p
            den = m.denominator
            while den % p == 0:
                den //= p
            if den != 1:
                raise LatticeOverflow(f"multiplicity {m} not in Z[1/p]")
            t[pt] = t.get(pt, Fraction(0)) + m
        self.terms = {pt: m for pt, m in t.items() if m}

    def __add__(self, other):
        out = dict(self.terms)
        for pt, m in other.terms.items():
            out[pt] = out.get(pt, Fraction(0)) + m
        return Divisor(out)

    def __neg__(self):
        return Divisor({pt: -m for pt, m in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "Divisor":
        c = Fraction(c)
        out = {}
        for pt, m in self.terms.items():
            prec = pt.norm.prec
            if not prec.in_lattice(m * c):
                raise LatticeOverflow(f"{m}*{c} leaves the lattice")
            out[pt] = m * c
        return Divisor(out)

    def multiplicity(self, pt: PointSpec) -> Fraction:
        return self.terms.get(pt, Fraction(0))

    def degree(self) -> Fraction:
        return sum((pt.deg_over_K * m for pt, m in self.terms.items()), Fraction(0))

    @property
    def denom_hint(self) -> int:
        return math.lcm(*(m.denominator for m in self.terms.values())) if self.terms else 1

    def is_effective(self) -> bool:
        return all(m > 0 for m in self.terms.values())

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, Divisor):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{m}{pt!r}" for pt, m in self.terms.items())


def to_fundamental(alpha: Scalar, q: Scalar) -> Scalar:
    """Move alpha by an integer power of q into ``|q| < |x| <= 1``."""
    k = math.floor(alpha.valuation() / q.valuation())
    return alpha if k == 0 else alpha * q ** (-k)


@dataclass(frozen=True)
class PeriodicDivisor:
    """A q-periodic divisor represented by its part in ``|q| < |alpha| <= 1``."""

    fundamental: Divisor
    q: Scalar

    def __post_init__(self):
        _check_q(self.q)
        vq = self.q.valuation()
        for pt in self.fundamental.terms:
            if not 0 <= pt.absval_exp < vq:
                raise ValueError(f"point {pt.label} outside the fundamental annulus")

    @classmethod
    def of_points(cls, q: Scalar, items) -> "PeriodicDivisor":
        """Build from ``(scalar_or_point, multiplicity)`` pairs, normalizing
        rational points into the fundamental annulus."""
        terms: dict[PointSpec, Fraction] = {}
        for x, m in items:
            pt = x if isinstance(x, PointSpec) else PointSpec.rational(to_fundamental(x, q))
            terms[pt] = terms.get(pt, Fraction(0)) + Fraction(m)
        return cls(Divisor(terms), q)

    def __add__(self, other):
        return PeriodicDivisor(self.fundamental + other.fundamental, self.q)

    def __neg__(self):
        return PeriodicDivisor(-self.fundamental, self.q)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return PeriodicDivisor(self.fundamental.scale(c), self.q)

    def multiplicity(self, pt: PointSpec) -> Fraction:
        return self.fundamental.multiplicity(pt)


def _check_q(q: Scalar) -> None:
    if q.is_zero() or not q.valuation() > 0:
        raise BadModulus("q must satisfy 0 < |q| < 1")


class JacobiClass:
    """Class of a nonzero scalar modulo exact powers ``q**m``, m in Z[1/p].

    The class is stored Frobenius-lifted: ``lifted`` is ``rep**(p**depth)``.
    Frobenius is bijective and maps q-powers onto q-powers, so two classes
    agree iff their lifts to a common depth agree; fractional powers of
    norms never need an actual root.  ``level`` bounds the t-adic precision
    up to which the (unlifted) representative is certified.
    """

    __slots__ = ("lifted", "depth", "q", "level")

    def __init__(self, rep: Scalar, q: Scalar, level=None, depth: int = 0):
        _check_q(q)
        if rep.is_zero():
            raise ValueError("Jacobi classes live in K^x")
        self.lifted, self.depth, self.q = rep, depth, q
        tp = rep.prec.tprec
        self.level = tp if level is None or level == INF else min(Fraction(level), tp)

    def _lift_to(self, depth: int) -> Scalar:
        x = self.lifted
        for _ in range(depth - self.depth):
            x = x.frobenius()
        return x

    @property
    def rep(self) -> Scalar:
        """A representative in K (raises LatticeOverflow without root headroom)."""
        x = self.lifted
        for _ in range(self.depth):
            x = x.pth_root()
        return x

    @property
    def canonical(self) -> Scalar:
        """Representative with valuation in ``[0, val q)`` where representable."""
        rep = self.rep
        prec = rep.prec
        m = rep.valuation() / self.q.valuation()
        m = Fraction(math.floor(m * prec.denom), prec.denom)
        try:
            return rep * self.q ** (-m)
        except LatticeOverflow:
            return rep

    def __eq__(self, other):
        if not isinstance(other, JacobiClass):
            return NotImplemented
        depth = max(self.depth, other.depth)
        p = self.q.prec.p
        level = min(self.level * p ** (depth - self.depth),
                    other.level * p ** (depth - other.depth))
        return q_power_class(self._lift_to(depth), other._lift_to(depth),
                             self.q, level) is not None

    __hash__ = None

    def __mul__(self, other):
        depth = max(self.depth, other.depth)
        out = JacobiClass(self._lift_to(depth) * other._lift_to(depth), self.q, depth=depth)
        out.level = min(self.level, other.level)
        return out

    def is_one(self) -> bool:
        return self == JacobiClass(Scalar.one(self.q.prec), self.q)

    def __repr__(self):
        try:
            return f"JacobiClass({self.canonical})"
        except LatticeOverflow:
            return f"JacobiClass(({self.lifted})^(1/{self.q.prec.p}^{self.depth}))"


def divisor_group_add(d1: Divisor, d2: Divisor) -> Divisor:
    return d1 + d2


def deg_q(d: PeriodicDivisor) -> Fraction:
    return d.fundamental.degree()


def _p_depth(m: Fraction, p: int) -> int:
    j, den = 0, m.denominator
    while den % p == 0:
        den //= p
        j += 1
    return j


def jacobi_image(d: PeriodicDivisor) -> JacobiClass:
    """Product of ``N(alpha)**m_alpha`` over the fundamental points."""
    prec = d.q.prec
    terms = d.fundamental.terms
    depth = max((_p_depth(m, prec.p) for m in terms.values()), default=0)
    f = prec.p**depth
    lifted = Scalar.one(prec)
    for pt, m in terms.items():
        lifted = lifted * pt.norm ** int(m * f)
    return JacobiClass(lifted, d.q, depth=depth)


def abel_jacobi_check(d: PeriodicDivisor) -> bool:
    """Degree zero and trivial Jacobi image: d is the divisor of a q-periodic function."""
    return deg_q(d) == 0 and jacobi_image(d).is_one()


def _distinct(xs, q, level=None) -> bool:
    for a in range(len(xs)):
        for b in range(a + 1, len(xs)):
            if q_power_class(xs[a], xs[b], q, level) is not None:
                return False
    return True


def _equiv(x: Scalar, y: Scalar, q: Scalar) -> bool:
    return q_power_class(x, y, q) is not None


def auxiliary_pool(prec: Precision, size: int | None = None):
    """The deterministic candidates 1+t, 1+t^2, ... used for auxiliary points."""
    n = size if size is not None else max(2, math.ceil(prec.tprec) - 1)
    one = Scalar.one(prec)
    return [one + Scalar.t(k, prec) for k in range(1, n + 1)]


def corollary_divisor(alpha: PointSpec, i: int, q: Scalar,
                      avoid: PointSpec | None = None) -> PeriodicDivisor:
    """A principal q-periodic divisor with multiplicity ``1/p**i`` at alpha.

    K-rational alpha uses ``[alpha] + [uv] - [alpha u] - [v]``; other points
    use ``[alpha] - (d-1)[u] - [v]`` with ``v = u^(1-d) N(alpha)``.  Every
    term carries the factor ``1/p**i`` so degree and Jacobi image both stay
    trivial.  The auxiliary u, v avoid ``avoid`` modulo powers of q.
    """
    prec = q.prec
    _check_q(q)
    if i < 0 or i > prec.imax:
        raise LatticeOverflow(f"i={i} outside [0, {prec.imax}]")
    w = Fraction(1, prec.p**i)
    beta = avoid.norm if avoid is not None else None
    pool = auxiliary_pool(prec)

    if alpha.is_rational:
        a = to_fundamental(alpha.value, q)
        if beta is not None and avoid.is_rational and _equiv(a, beta, q):
            raise ValueError("the avoided point is alpha itself modulo q-powers")
        for ui, u in enumerate(pool):
            for v in pool[ui + 1:] + pool[:ui]:
                pts = [a, u * v, a * u, v]
                if not _distinct(pts, q):
                    continue
                if beta is not None and any(_equiv(x, beta, q) for x in pts[1:]):
                    continue
                items = [(alpha if a == alpha.value else a, w), (u * v, w),
                         (a * u, -w), (v, -w)]
                return PeriodicDivisor.of_points(q, items)
        raise PoolExhausted("no auxiliary u, v satisfy the distinctness constraints")

    dK = alpha.deg_over_K
    if not 0 <= alpha.absval_exp < q.valuation():
        raise ValueError("alpha must lie in the fundamental annulus")
    for u in pool:
        v = to_fundamental(u ** (1 - dK) * alpha.norm, q)
        if _equiv(u, v, q):
            continue
        if beta is not None and (_equiv(u, beta, q) or _equiv(v, beta, q)):
            continue
        pu = PointSpec.rational(u)
        pv = PointSpec.rational(v)
        terms = {alpha: w, pu: -(dK - 1) * w, pv: -w}
        return PeriodicDivisor(Divisor(terms), q)
    raise PoolExhausted("no auxiliary u satisfies the distinctness constraints")


def rr_dimension(d: PeriodicDivisor, i: int) -> int:
    """Dimension of the space of q-periodic f with ``Div f >= -d``."""
    prec = d.q.prec
    if i < 0 or i > prec.imax:
        raise DenominatorMismatch(f"i={i} outside [0, {prec.imax}]")
    for m in d.fundamental.terms.values():
        if (m * prec.p**i).denominator != 1:
            raise DenominatorMismatch(f"multiplicity {m} has denominator beyond p^{i}")
    deg = deg_q(d)
    if deg > 0:
        return int(deg * prec.p**i)
    if deg == 0:
        return 1 if jacobi_image(d).is_one() else 0
    return 0


# -- theta functions ---------------------------------------------------------


@dataclass
class ThetaData:
    series: RationalFn | None
    degree: Fraction
    multiplicator: Scalar
    trunc: Fraction
    q: Scalar
    level: Fraction = field(default=None)

    def __post_init__(self):
        if self.level is None:
            self.level = self.q.prec.tprec


def _theta_series(q: Scalar, T, prec: Precision, lattice: str) -> PerfSeries:
    T = Fraction(T)
    window = (-prec.xdeg, prec.xdeg)
    if lattice == "integer":
        ns = [Fraction(n) for n in range(0, math.floor(T) + 1)]
    elif lattice == "full":
        ns = prec.lattice(0, T)
    else:
        raise ValueError(f"unknown lattice {lattice!r}")
    one = PerfSeries.constant(1, prec, window)
    theta = one
    # fixed order of factors: increasing n
    for n in ns:
        qn = q**n
        theta = theta * (one - PerfSeries(prec, {-1: qn}, window))
        if n > 0:
            theta = theta * (one - PerfSeries(prec, {1: qn}, window))
    return theta


def theta_fundamental(q: Scalar, T, prec: Precision, lattice: str = "integer") -> ThetaData:
    """Truncated fundamental theta product, factors with ``|n| <= T``.

    ``lattice="integer"`` multiplies over n in Z and has degree 1 and
    multiplicator 1.  ``lattice="full"`` multiplies over ``(1/p**imax) Z``;
    shifting X by q then moves ``p**imax`` boundary factors at once, so the
    functional equation holds with degree ``p**imax`` and multiplicator
    ``q**s``, s the sum of the lattice points in ``[0, 1)``.
    """
    _check_q(q)
    series = _theta_series(q, T, prec, lattice)
    if lattice == "integer":
        degree, mult = Fraction(1), Scalar.one(prec)
    else:
        pts = prec.lattice(0, 1)[:-1]
        degree = Fraction(len(pts))
        mult = q ** sum(pts, Fraction(0))
    return ThetaData(RationalFn(series), degree, mult, Fraction(T), q)


def theta_at_point(alpha: PointSpec, q: Scalar, T, prec: Precision,
                   series: bool = True) -> ThetaData:
    """``Theta(X / alpha)``: degree one, multiplicator alpha."""
    _check_q(q)
    if not alpha.is_rational:
        if series:
            raise UnsupportedPoint("series mode needs a K-rational point")
        return ThetaData(None, Fraction(alpha.deg_over_K), alpha.norm, Fraction(T), q)
    base = _theta_series(q, T, prec, "integer")
    s = base.scale_variable(alpha.value.inv())
    return ThetaData(RationalFn(s), Fraction(1), alpha.value, Fraction(T), q)


def theta_of_divisor(d: PeriodicDivisor, T, prec: Precision) -> ThetaData:
    """Product of ``Theta_alpha ** (e m)`` over the fundamental points."""
    window = (-prec.xdeg, prec.xdeg)
    num = PerfSeries.constant(1, prec, window)
    den = PerfSeries.constant(1, prec, window)
    mult = Scalar.one(prec)
    degree = Fraction(0)
    for pt, m in sorted(d.fundamental.terms.items(), key=lambda kv: kv[0].label):
        if not pt.is_rational:
            raise UnsupportedPoint(f"theta series needs K-rational points, got {pt.label}")
        em = pt.insep_deg * m
        th = theta_at_point(pt, d.q, T, prec).series.num
        if em > 0:
            num = num * th**em
        else:
            den = den * th ** (-em)
        degree += em
        mult = mult * pt.value**em
    return ThetaData(RationalFn(num, den), degree, mult, Fraction(T), d.q)


def _minus_one_power(d: Fraction, prec: Precision) -> int:
    # (-1)^(n/p^j) = (-1)^n in characteristic p
    return 1 if prec.p == 2 or d.numerator % 2 == 0 else -1


def _residual(f: PerfSeries, g: PerfSeries, d: Fraction, c: Scalar, q: Scalar):
    """Valuation of ``g - c X^d f``, each coefficient compared only up to the
    precision it actually carries."""
    prec = f.prec
    vq = q.valuation()
    fc, gc = f.coeffs, g.coeffs
    zero = Scalar.zero(prec)
    resid = INF
    lo, hi = -INF, INF
    if f.truncated or g.truncated:
        # beyond the common window one side was cut off, not zero
        lo, hi = max(g.lo, f.lo + d), min(g.hi, f.hi + d)
    for k in sorted(set(gc) | {e + d for e in fc}):
        if not lo <= k <= hi:
            continue
        r = gc.get(k, zero) - c * fc.get(k - d, zero)
        # coefficients of g at k > 0 were multiplied by q^-k and lost k*val(q)
        trusted = prec.tprec - max(Fraction(0), k) * vq - max(Fraction(0), -c.valuation())
        resid = min(resid, r.truncate(trusted).valuation())
    return resid


def functional_residual(f, q: Scalar, degree, multiplicator: Scalar):
    """Valuation of ``f(X/q) - (-X)^degree f(X) / multiplicator``.

    ``f`` is a series (or the numerator of a RationalFn with trivial
    denominator); larger values mean a smaller residual.
    """
    if isinstance(f, RationalFn):
        f = f.num
    degree = Fraction(degree)
    g = f.scale_variable(q.inv())
    c = multiplicator.inv() * _minus_one_power(degree, f.prec)
    return _residual(f, g, degree, c, q)


def _extract_series(f: PerfSeries, q: Scalar):
    prec = f.prec
    f = f * Scalar.t(-f.gauss_val(), prec)
    g = f.scale_variable(q.inv())

    def dominant(s: PerfSeries):
        v = s.gauss_val()
        return next(e for e, c in s.coeffs.items() if c.valuation() == v)

    kf, kg = dominant(f), dominant(g)
    d = kg - kf
    sign = _minus_one_power(d, prec)
    c = g.coeff(kg) / (f.coeff(kf) * sign)
    resid = _residual(f, g, d, c * sign, q)
    if not resid > g.gauss_val():
        raise NotTheta("f(X/q) / f(X) is not a monomial at working precision")
    return d, c.inv(), resid


def extract_degree_multiplicator(f, q: Scalar):
    """Recover ``(degree, multiplicator, level)`` from ``f(X/q) = (-X)^d f(X) / a``.

    ``level`` is the t-adic precision up to which the relation was verified;
    the multiplicator is only certified to that precision.
    """
    _check_q(q)
    if isinstance(f, PerfSeries):
        f = RationalFn(f)
    dn, an, ln = _extract_series(f.num, q)
    dd, ad, ld = _extract_series(f.den, q)
    return dn - dd, an / ad, min(ln, ld, q.prec.tprec)


def function_of_divisor(d: Divisor, prec: Precision) -> RationalFn:
    """A rational function with divisor ``d`` (product of elementary factors)."""
    window = (-prec.xdeg, prec.xdeg)
    one = PerfSeries.constant(1, prec, window)
    num, den = one, one
    for pt, m in sorted(d.terms.items(), key=lambda kv: kv[0].label):
        em = pt.insep_deg * m
        if pt.is_rational:
            a = pt.value
            if pt.absval_exp >= 0:
                factor = one - PerfSeries(prec, {-1: a}, window)
            else:
                factor = one - PerfSeries(prec, {1: a.inv()}, window)
        else:
            if pt.min_poly is None:
                raise UnsupportedPoint(f"point {pt.label} has no minimal polynomial")
            phi = pt.min_poly.with_window(*window)
            if pt.absval_exp >= 0:
                factor = phi.shift(-pt.deg_over_K).with_window(*window)
            else:
                factor = phi * pt.norm.inv()
            em = m
        if em > 0:
            num = num * factor**em
        else:
            den = den * factor ** (-em)
    return RationalFn(num, den)

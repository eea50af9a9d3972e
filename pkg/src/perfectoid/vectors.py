"""Seeded pseudo-random test vectors shared by the CLI and the test suite."""

from __future__ import annotations

import random
from fractions import Fraction

from .lattice import PeriodicDivisor, PointSpec
from .scalar import Precision, Scalar
from .series import PerfSeries


def rng_for(seed: int, stream: str) -> random.Random:
    # one independent stream per vector kind, stable across Python versions
    return random.Random(f"{seed}:{stream}")


def random_scalar(rng: random.Random, prec: Precision, lo=0, hi=None, nterms: int = 4) -> Scalar:
    hi = prec.tprec if hi is None else Fraction(hi)
    pts = [e for e in prec.lattice(lo, hi) if e < hi]
    digits = {e: rng.randrange(prec.p) for e in rng.sample(pts, min(nterms, len(pts)))}
    return Scalar(prec, digits)


def random_nonzero(rng: random.Random, prec: Precision, lo=-2, hi=4, nterms: int = 4) -> Scalar:
    while True:
        x = random_scalar(rng, prec, lo, hi, nterms)
        if not x.is_zero():
            return x


def random_unit(rng: random.Random, prec: Precision, nterms: int = 3) -> Scalar:
    """``c + (terms of positive valuation)`` with c a nonzero digit."""
    c = Scalar.from_int(rng.randrange(1, prec.p), prec)
    tail = random_scalar(rng, prec, Fraction(1, prec.denom), prec.tprec / 2, nterms)
    return c + tail


def random_rational_alpha(rng: random.Random, prec: Precision, q: Scalar,
                          root_depth: int = 0) -> Scalar:
    """A point of the fundamental annulus ``|q| < |alpha| <= 1``.

    With ``root_depth = j`` all exponents lie in ``(1/p**(imax-j)) Z`` so that
    ``alpha`` (and series built from it) admit j successive p-th roots.
    """
    coarse = Precision(prec.p, max(prec.imax - root_depth, 0), prec.tprec, prec.xdeg)
    vals = [e for e in coarse.lattice(0, q.valuation()) if e < q.valuation()]
    u = random_unit(rng, coarse)
    return Scalar(prec, u.digits) * Scalar.t(rng.choice(vals), prec)


def random_distinguished(rng: random.Random, prec: Precision, max_order=6,
                         nterms: int = 6) -> PerfSeries:
    """A norm-one series in ``K<X>`` of distinguished order at most ``max_order``."""
    exps = prec.lattice(0, prec.xdeg)
    s = rng.choice([e for e in exps if e <= max_order])
    coeffs = {s: random_unit(rng, prec)}
    for e in rng.sample(exps, min(nterms, len(exps))):
        if e == s:
            continue
        # below s anything integral, above s strictly inside the unit ball
        lo = 0 if e < s else Fraction(1, prec.denom)
        coeffs[e] = random_scalar(rng, prec, lo, prec.tprec / 2, 3)
    return PerfSeries(prec, coeffs)


def random_small_divisor(rng: random.Random, prec: Precision, q: Scalar,
                         max_points: int = 3, max_depth: int | None = None,
                         numerators=(-2, -1, 1, 2)) -> PeriodicDivisor:
    """Rational points of the fundamental annulus with small multiplicities."""
    depth = prec.imax if max_depth is None else max_depth
    items = []
    for _ in range(rng.randint(1, max_points)):
        j = rng.randint(0, depth)
        alpha = random_rational_alpha(rng, prec, q, root_depth=j)
        k = rng.choice(numerators)
        items.append((PointSpec.rational(alpha), Fraction(k, prec.p**j)))
    return PeriodicDivisor.of_points(q, items)

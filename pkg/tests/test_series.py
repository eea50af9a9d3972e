import threading
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from perfectoid.errors import (
    Cancelled,
    LatticeOverflow,
    NonTermination,
    NotNormalized,
    WindowMismatch,
)
from perfectoid.formats import parse_series
from perfectoid.lattice import PointSpec
from perfectoid.scalar import INF, Precision, Scalar
from perfectoid.series import (
    PerfSeries,
    RationalFn,
    distinguished_order,
    divisor_of,
    gauss_norm,
    is_unit,
    ord_at,
    rescale_exponents,
    weierstrass_prepare,
)
from perfectoid.vectors import random_distinguished, rng_for

from conftest import PREC, scalars


def S(text, prec=PREC, window=None):
    return parse_series(text, prec, window)


def t(e):
    return Scalar.t(e, PREC)


def test_gauss_norm_and_reduction():
    f = S("t*X + t^2*X^(1/2)")
    assert f.gauss_val() == 1
    assert gauss_norm(f) == Fraction(1, 2)
    g = S("t^(1/2)*X")
    assert g.gauss_val() == Fraction(1, 2)
    with pytest.raises(ValueError):
        gauss_norm(g)
    h = S("1 + X^(3/4) + t*X^5")
    assert distinguished_order(h) == Fraction(3, 4)
    assert h.reduce().degree() == Fraction(3, 4)


def test_is_unit():
    assert is_unit(S("1 + t*X"))
    assert not is_unit(S("1 + X"))
    with pytest.raises(NotNormalized):
        is_unit(S("t*X"))


def test_zero_reduction_impossible_at_norm_one():
    with pytest.raises(NotNormalized):
        distinguished_order(PerfSeries(PREC))


def test_multiplication_truncates_window():
    f = S("X^5")
    g = f * f
    assert g.is_zero() and g.truncated
    with pytest.raises(WindowMismatch):
        S("X", window=(0, 2)) + S("X", window=(-1, 1))


def test_rescale_example():
    # X^5 + X^(1/4) becomes X^20 + X in the variable X^(1/4)
    f = S("X^5 + X^(1/4)")
    assert f.lcd_level() == 2
    assert f.to_ypoly(2) == {20: Scalar.one(PREC), 1: Scalar.one(PREC)}
    r = rescale_exponents(f, 2)
    assert r.support() == [1, 20]
    assert rescale_exponents(r, -2) == f


def test_frobenius_and_root_of_series():
    f = S("1 + t*X^(1/2)")
    assert f.frobenius() == f * f
    assert f.pth_root() ** 2 == f
    with pytest.raises(LatticeOverflow):
        S("X^(1/4)").pth_root()


def test_scale_variable_and_evaluate():
    f = S("1 + X + X^2")
    g = f.scale_variable(t(1))
    assert g == S("1 + t*X + t^2*X^2")
    assert f.evaluate(t(1)) == Scalar.one(PREC) + t(1) + t(2)


def test_prepare_known_factorisation():
    g = S("(1 + t*X)*(X - t)")
    for schedule in ("division", "hensel"):
        P = weierstrass_prepare(g, schedule=schedule)
        assert P.order == 1
        assert P.monic == S("X - t")
        assert P.unit * P.monic == g


def test_prepare_fractional_rescaling_case():
    g = S("X^5 + X^(1/4)")
    P = weierstrass_prepare(g)
    assert P.order == 5 and P.level == 2
    assert P.order * PREC.p ** P.level == 20
    assert P.monic == g and P.unit == S("1")


def test_prepare_unit_input():
    g = S("1 + t*X")
    P = weierstrass_prepare(g)
    assert P.order == 0 and P.monic == S("1") and P.unit == g


def test_prepare_errors():
    with pytest.raises(NotNormalized):
        weierstrass_prepare(S("t*X"))
    with pytest.raises(NonTermination):
        weierstrass_prepare(S("t + X + t*X^3"), max_iter=1)
    ev = threading.Event()
    ev.set()
    with pytest.raises(Cancelled):
        weierstrass_prepare(S("t + X + t*X^3"), cancel=ev)


def test_schedules_agree_on_random_inputs():
    rng = rng_for(7, "schedules")
    for _ in range(20):
        g = random_distinguished(rng, PREC)
        a = weierstrass_prepare(g, "division")
        b = weierstrass_prepare(g, "hensel")
        assert a.monic == b.monic and a.unit == b.unit


def test_ord_at_examples():
    pt = PointSpec.rational(t(1))
    pt2 = PointSpec.rational(t(2))
    f = RationalFn(S("(X - t)^2"), S("X - t^2"))
    assert ord_at(f, pt) == 2
    assert ord_at(f, pt2) == -1
    assert ord_at(PerfSeries(PREC), pt) == INF
    # a fractional zero: 1 + t^(1/2) X^(-1/2) vanishes to order 1/2 at X = t
    h = RationalFn(S("X^(1/2) + t^(1/2)"), S("X^(1/2)"))
    assert ord_at(h, pt) == Fraction(1, 2)


def test_divisor_of_rational_function():
    pts = [PointSpec.rational(t(1)), PointSpec.rational(t(2))]
    f = RationalFn(S("(X - t)^2"), S("X - t^2"))
    d = divisor_of(f, pts)
    assert d.multiplicity(pts[0]) == 2 and d.multiplicity(pts[1]) == -1


def test_rational_function_arithmetic():
    a = RationalFn(S("1 + X"), S("1 + t*X"))
    b = RationalFn(S("X"))
    assert (a * b) / b == a
    assert a ** -1 == RationalFn(S("1 + t*X"), S("1 + X"))
    assert (a ** 2).pth_root() == a


def test_machine_round_trip():
    f = S("1 + t^(1/4)*X^(3/4) + X^7")
    assert PerfSeries.from_machine(f.to_machine(), PREC) == f
    assert parse_series(str(f), PREC) == f


# -- properties ---------------------------------------------------------------

series_small = st.dictionaries(
    st.sampled_from(PREC.lattice(0, 4)), scalars(hi=6, max_terms=3), max_size=4
).map(lambda d: PerfSeries(PREC, d))


@settings(max_examples=100, deadline=None)
@given(series_small, series_small, series_small)
def test_series_ring_axioms(f, g, h):
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h
    assert f * g == g * f


@settings(max_examples=100, deadline=None)
@given(series_small, series_small)
def test_gauss_valuation_multiplicative(f, g):
    if f.is_zero() or g.is_zero():
        return
    assert (f * g).gauss_val() == f.gauss_val() + g.gauss_val()


@settings(max_examples=100, deadline=None)
@given(series_small, series_small, st.integers(0, 1))
def test_rescale_is_a_ring_map(f, g, i):
    assert rescale_exponents(f * g, i) == rescale_exponents(f, i) * rescale_exponents(g, i)
    assert rescale_exponents(f + g, i) == rescale_exponents(f, i) + rescale_exponents(g, i)


def test_series_ops_examples():
    p3 = Precision(3, 1, 8, 4)
    assert S("1 + X", p3) * S("1 - X", p3) == S("1 - X^2", p3)
    assert S("1 + X^(1/2)") ** 2 == S("1 + X")
    w = (-8, 8)
    assert S("t*X", window=w) * (S("X^-1", window=w) * t(-1)) == S("1", window=w)

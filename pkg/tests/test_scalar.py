from fractions import Fraction

import pytest
from hypothesis import given, settings

from perfectoid.errors import BadModulus, DivisionByZero, LatticeOverflow, NotIntegral
from perfectoid.scalar import INF, Precision, Scalar, q_power_class

from conftest import PREC, scalars, units


def t(e, prec=PREC):
    return Scalar.t(e, prec)


def test_precision_lattice_and_scale():
    p = Precision(2, 2, 16, 8)
    assert p.denom == 4 and p.limit == 64
    assert p.in_lattice(Fraction(3, 4)) and not p.in_lattice(Fraction(1, 8))
    assert p.scale(Fraction(5, 4)) == 5 and p.unscale(5) == Fraction(5, 4)
    with pytest.raises(LatticeOverflow):
        p.scale(Fraction(1, 3))
    assert Precision.from_dict(p.as_dict()) == p
    with pytest.raises(ValueError):
        Precision(4, 1, 8, 8)


def test_characteristic_two_cancellation():
    one = Scalar.one(PREC)
    assert one + one == Scalar.zero(PREC)
    assert t(Fraction(1, 4)) * t(Fraction(3, 4)) == t(1)


def test_mixed_lattice_product_p3():
    p3 = Precision(3, 1, 6, 4)
    a = Scalar.t(Fraction(1, 3), p3)
    assert a * a * a == Scalar.t(1, p3)
    assert Scalar.from_int(2, p3) + Scalar.from_int(1, p3) == Scalar.zero(p3)


def test_inverse_geometric_series():
    # 1/(1+t) = sum (-t)^k, truncated at t^4 when tprec = 4
    p = Precision(2, 0, 4, 4)
    inv = (Scalar.one(p) + Scalar.t(1, p)).inv()
    assert inv == Scalar(p, {0: 1, 1: 1, 2: 1, 3: 1})


def test_inverse_p3_alternating_signs():
    p = Precision(3, 0, 4, 4)
    inv = (Scalar.one(p) + Scalar.t(1, p)).inv()
    assert inv == Scalar(p, {0: 1, 1: 2, 2: 1, 3: 2})


def test_division_by_zero():
    with pytest.raises(DivisionByZero):
        Scalar.zero(PREC).inv()
    with pytest.raises(ZeroDivisionError):
        Scalar.one(PREC) / Scalar.zero(PREC)


def test_valuation_leading_and_reduce():
    a = t(Fraction(3, 4)) + t(2)
    assert a.valuation() == Fraction(3, 4)
    assert a.leading() == (Fraction(3, 4), 1)
    assert Scalar.zero(PREC).valuation() == INF
    assert (Scalar.one(PREC) + t(1)).reduce() == 1
    assert t(1).reduce() == 0
    with pytest.raises(NotIntegral):
        t(-1).reduce()


def test_fractional_power_root_first():
    x = Scalar.one(PREC) + t(1)
    y = x ** Fraction(3, 4)
    assert y ** 4 == x ** 3
    assert t(1) ** Fraction(1, 4) == t(Fraction(1, 4))
    with pytest.raises(LatticeOverflow):
        t(Fraction(1, 4)) ** Fraction(1, 2)


def test_pth_root_and_frobenius():
    a = Scalar.one(PREC) + t(Fraction(1, 2))
    assert a.pth_root() == Scalar.one(PREC) + t(Fraction(1, 4))
    assert a.pth_root().frobenius() == a
    assert a.frobenius() == a * a


def test_q_power_class_examples():
    q = t(1)
    a = t(Fraction(3, 4)) * (Scalar.one(PREC) + t(1))
    b = Scalar.one(PREC) + t(1)
    assert q_power_class(a, b, q) == Fraction(3, 4)
    assert q_power_class(b, a, q) == Fraction(-3, 4)
    assert q_power_class(a, Scalar.one(PREC) + t(2), q) is None
    # class forced by valuation but outside the lattice
    q3 = t(3)
    assert q_power_class(t(1), Scalar.one(PREC), q3) is None
    with pytest.raises(BadModulus):
        q_power_class(a, b, Scalar.one(PREC))


def test_q_power_class_level():
    q = t(1)
    a = Scalar.one(PREC) + t(10)
    assert q_power_class(a, Scalar.one(PREC), q) is None
    assert q_power_class(a, Scalar.one(PREC), q, level=10) == 0


def test_text_and_machine_round_trip():
    from perfectoid.formats import parse_scalar

    a = t(Fraction(1, 2)) + t(3) + t(Fraction(-1, 4))
    assert parse_scalar(str(a), PREC) == a
    assert Scalar.from_machine(a.to_machine(), PREC) == a
    assert parse_scalar("1 + t^(1/2) + t^(1/2)", PREC) == Scalar.one(PREC)


# -- properties: on integral scalars truncation is a ring map, so the ring
# axioms hold exactly

@settings(max_examples=200, deadline=None)
@given(scalars(), scalars(), scalars())
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c
    assert a - a == Scalar.zero(PREC)


@settings(max_examples=200, deadline=None)
@given(units())
def test_unit_inverse(u):
    assert u * u.inv() == Scalar.one(PREC)
    assert u.inv().inv() == u


@settings(max_examples=200, deadline=None)
@given(scalars(lo=-2), scalars(lo=-2))
def test_ultrametric(a, b):
    assert (a + b).valuation() >= min(a.valuation(), b.valuation())
    if a.valuation() != b.valuation():
        assert (a + b).valuation() == min(a.valuation(), b.valuation())


@settings(max_examples=200, deadline=None)
@given(scalars(hi=8), scalars(hi=8))
def test_valuation_multiplicative(a, b):
    assert (a * b).valuation() == a.valuation() + b.valuation()


@settings(max_examples=200, deadline=None)
@given(scalars(hi=8), scalars(hi=8))
def test_frobenius_is_a_ring_map(a, b):
    assert (a + b).frobenius() == a.frobenius() + b.frobenius()
    assert (a * b).frobenius() == a.frobenius() * b.frobenius()
    assert a.frobenius().pth_root() == a


@settings(max_examples=100, deadline=None)
@given(units())
def test_q_power_class_recovers_exponent(u):
    q = t(1)
    for m in (Fraction(0), Fraction(1, 4), Fraction(7, 4), Fraction(-3, 2)):
        assert q_power_class(u * q ** m, u, q) == m


def test_field_ops_examples():
    assert (t(Fraction(1, 2)) + t(1)) + t(Fraction(1, 2)) == t(1)
    p3 = Precision(3, 1, 6, 4)
    assert Scalar.t(Fraction(1, 3), p3) * Scalar.t(Fraction(2, 3), p3) == Scalar.t(1, p3)
    with pytest.raises(Exception):
        t(1) + Scalar.t(1, p3)

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from perfectoid.curve import (
    AnnulusId,
    CechComplexData,
    CechElement,
    EulerData,
    boundary_d,
    cech_cohomology,
    cech_report,
    elliptic_family,
    exact_sequence_check,
    glue_to_U01minus,
    kernel_basis,
    lift,
    line_bundle_euler,
    rank_over_K,
    ring_element,
    verify_family_substitution,
    wp_diagnostic,
    wp_enumeration,
)
from perfectoid.errors import (
    BadLambda,
    DenominatorMismatch,
    LatticeOverflow,
    PoleTooClose,
    UnsupportedDivisor,
    WindowOverflow,
)
from perfectoid.lattice import (
    Divisor,
    PeriodicDivisor,
    PointSpec,
    corollary_divisor,
)
from perfectoid.scalar import Precision, Scalar

from conftest import PREC, scalars

Q = Scalar.t(1, PREC)
ONE = Scalar.one(PREC)
F = Fraction


def t(e):
    return Scalar.t(e, PREC)


def U0(**kw):
    return ring_element(AnnulusId.U0, _keys(kw), PREC)


def U1(**kw):
    return ring_element(AnnulusId.U1, _keys(kw), PREC)


def _keys(kw):
    # a1=... means family a, n=1; b0 means n=0
    return {(k[0], F(k[1:].replace("_", "/"))): v for k, v in kw.items()}


def test_annulus_radii():
    assert AnnulusId.U0.value == (1, -1)
    assert AnnulusId.U01minus.value == (2, 2)


def test_element_support_shape():
    with pytest.raises(ValueError):
        U0(a0=ONE)  # U0 has a_n only for n > 0
    with pytest.raises(ValueError):
        ring_element(AnnulusId.U0, {("e", F(1)): ONE}, PREC)
    with pytest.raises(WindowOverflow):
        U0(a9=ONE)
    with pytest.raises(LatticeOverflow):
        ring_element(AnnulusId.U0, {("a", F(1, 8)): ONE}, PREC)


def test_gluing_examples():
    g0 = ring_element(AnnulusId.U0plus, {("g", F(0)): t(1)}, PREC)
    assert glue_to_U01minus(g0).get("f", 0) == t(1)
    g1 = ring_element(AnnulusId.U0plus, {("g", F(1)): ONE}, PREC)
    assert glue_to_U01minus(g1).coeffs == {("f", F(1)): ONE}


def test_boundary_examples():
    k = ONE + t(2)
    plus, minus = boundary_d(U0(b0=k), U1(c0=k))
    assert plus.is_zero() and minus.is_zero()
    plus, minus = boundary_d(U0(), U1(c1=ONE))
    assert plus.get("e", 1) == -ONE and minus.is_zero()


def test_boundary_coefficient_map():
    # (a_n, b_n) + (c_n, d_n) -> (b_n - c_n, a_n - d_n) on the paired monomials
    a, b, c, d = ONE, t(1), t(2), t(3)
    plus, minus = boundary_d(U0(a2=a, b2=b), U1(c2=c, d2=d))
    assert plus.get("e", -2) == b and plus.get("e", 2) == -c
    assert minus.get("f", 2) == a and minus.get("f", -2) == -d


def test_f0_cannot_be_lifted_in_plain_variant():
    c = CechComplexData(Q, PREC)
    plus = CechElement(AnnulusId.U01plus, PREC)
    minus = CechElement(AnnulusId.U01minus, PREC, {("f", F(0)): ONE})
    assert lift(c, plus, minus) is None
    shifted = CechComplexData(Q, PREC, F(1))
    pre = lift(shifted, plus, minus)
    assert pre is not None
    assert boundary_d(*pre) == (plus, minus)


def test_lift_of_image_round_trips():
    c = CechComplexData(Q, PREC)
    f0, f1 = U0(a1=ONE, b1_2=t(1), b0=t(3)), U1(c3=t(2), d1=ONE)
    plus, minus = boundary_d(f0, f1)
    g0, g1 = lift(c, plus, minus)
    assert boundary_d(g0, g1) == (plus, minus)


@pytest.mark.parametrize("p", [2, 3, 5])
@pytest.mark.parametrize("imax", [0, 1, 2])
@pytest.mark.parametrize("xdeg", [4, 8])
def test_cohomology_truncation_independent(p, imax, xdeg):
    prec = Precision(p, imax, 16, xdeg)
    q = Scalar.t(1, prec)
    assert cech_cohomology(CechComplexData(q, prec)) == (1, 1)
    assert cech_cohomology(CechComplexData(q, prec, F(1)))[1] == 0


def test_cohomology_report_fields():
    rep = cech_report(CechComplexData(Q, PREC, F(1, 2)))
    assert rep["variant"] == "unit_shifted:1/2"
    assert (rep["h0"], rep["h1"]) == (1, 0)
    assert rep["block_count"] == 1 + len(PREC.lattice(0, PREC.xdeg)) - 1


def test_kernel_is_diagonal_constants():
    basis = kernel_basis(CechComplexData(Q, PREC))
    assert len(basis) == 1
    f0, f1 = basis[0]
    assert set(f0.coeffs) == {("b", F(0))} and set(f1.coeffs) == {("c", F(0))}
    assert f0.get("b", 0) == f1.get("c", 0)


def test_rank_over_K():
    assert rank_over_K([[ONE, t(1)], [t(1), t(2)]]) == 1
    assert rank_over_K([[ONE, t(1)], [t(1), ONE]]) == 2


@settings(max_examples=50, deadline=None)
@given(scalars(max_terms=3), scalars(max_terms=3), scalars(max_terms=3), scalars(max_terms=3))
def test_boundary_is_linear(a, b, c, d):
    x0, x1 = U0(a1=a, b0=b), U1(c0=c, d1_4=d)
    y0, y1 = U0(a1=c, b1=d), U1(c1=a, d1=b)
    s = boundary_d(x0 + y0, x1 + y1)
    l, r = boundary_d(x0, x1), boundary_d(y0, y1)
    assert s == (l[0] + r[0], l[1] + r[1])


# -- line bundles ------------------------------------------------------------

E = PointSpec.rational(ONE, "e")


@pytest.mark.parametrize("i", [0, 1, 2])
def test_euler_point_bundle(i):
    D = Divisor({E: F(1, 2**i)})
    assert line_bundle_euler(D, i, Q).as_tuple() == (1, 0, 1, 1)


def test_euler_trivial_and_degree_two():
    assert line_bundle_euler(Divisor(), 0, Q).as_tuple() == (1, 1, 0, 0)
    assert line_bundle_euler(Divisor({E: 2}), 0, Q) == EulerData(2, 0, 2, 2)


def test_euler_errors():
    with pytest.raises(DenominatorMismatch):
        line_bundle_euler(Divisor({E: F(1, 2)}), 0, Q)
    with pytest.raises(UnsupportedDivisor):
        line_bundle_euler(Divisor({E: -1}), 0, Q)


def test_euler_identity():
    for D, i in [(Divisor({E: F(3, 4)}), 2), (Divisor({E: 5}), 1), (Divisor(), 0)]:
        e = line_bundle_euler(D, i, Q)
        assert e.h0 - e.h1 == e.chi == e.skyscraper_dim


# -- elliptic family -----------------------------------------------------------

LAMBDAS = [ONE, t(1), ONE + t(2), Scalar.zero(PREC), t(Fraction(1, 2)), ONE]


def test_elliptic_row_zero_and_two():
    e0 = elliptic_family(0, LAMBDAS, PREC)
    assert [(ex, ey) for _, ex, ey in e0.monomials] == [
        (0, 2), (3, 0), (1, 1), (2, 0), (0, 1), (1, 0), (0, 0)]
    e2 = elliptic_family(2, LAMBDAS, PREC)
    assert {ex for _, ex, _ in e2.monomials} == {0, F(3, 4), F(1, 4), F(2, 4)}
    assert e2.monomials[0][2] == F(2, 4)


def test_elliptic_errors():
    with pytest.raises(BadLambda):
        elliptic_family(0, [Scalar.zero(PREC)] + LAMBDAS[1:], PREC)
    with pytest.raises(LatticeOverflow):
        elliptic_family(3, LAMBDAS, PREC)


@settings(max_examples=50, deadline=None)
@given(st.lists(scalars(max_terms=3), min_size=6, max_size=6), st.integers(0, 2))
def test_family_substitution(lams, i):
    lams[0] = lams[0] + ONE if lams[0].is_zero() else lams[0]
    assert verify_family_substitution(elliptic_family(i, lams, PREC))


def test_family_point_evaluation():
    # substituting x^(p^i) into row i at (x, y) equals row 0 at (x^(p^i), y^(p^i))
    x, y = ONE + t(1), t(Fraction(1, 2))
    e0, e1 = elliptic_family(0, LAMBDAS, PREC), elliptic_family(1, LAMBDAS, PREC)
    assert e1.evaluate(x * x, y * y) == e0.evaluate(x, y)


# -- exact sequence ------------------------------------------------------------


def test_exact_sequence_examples():
    zero = PeriodicDivisor(Divisor(), Q)
    deg, cls, ok = exact_sequence_check(zero)
    assert deg == 0 and cls.is_one() and ok
    a, b = ONE + t(F(1, 4)), ONE + t(1)
    d = PeriodicDivisor.of_points(Q, [(a, 1), (b, -1)])
    deg, cls, ok = exact_sequence_check(d)
    assert deg == 0 and not cls.is_one() and not ok
    for i in range(3):
        c = corollary_divisor(PointSpec.rational(a), i, Q)
        assert exact_sequence_check(c)[2]
    single = PeriodicDivisor.of_points(Q, [(a, F(1, 4))])
    assert not exact_sequence_check(single)[2]


# -- p-function diagnostic ---------------------------------------------------

X0 = ONE + t(F(1, 2))


def test_wp_enumeration_order():
    ns = wp_enumeration(PREC, 1, 1)
    assert ns == [0, F(1, 2), F(-1, 2), 1, -1]


def test_wp_integers_converges():
    rep = wp_diagnostic(X0, Q, 8)
    assert rep.verdict == "converges"
    for n, v, _ in rep.terms:
        if n and v != float("inf"):
            assert v == abs(n)


def test_wp_fractional_diverges():
    rep = wp_diagnostic(X0, Q, 8, j=2)
    assert rep.verdict == "diverges"
    assert [v for _, v in rep.slice_vals] == [1, F(1, 2), F(1, 4)]


@pytest.mark.parametrize("T", [1, 2, 4])
def test_wp_periodicity(T):
    rep = wp_diagnostic(X0, Q, T)
    assert rep.periodicity_residual >= T - 1


def test_wp_pole_too_close():
    with pytest.raises(PoleTooClose):
        wp_diagnostic(ONE + t(8), Q, 2)


def test_wp_report_dict():
    d = wp_diagnostic(X0, Q, 2).as_dict()
    assert d["mode"] == "integers" and d["terms"][1] == {
        "n": "1/1", "norm_exp": "1/1", "prime_norm_exp": "2/1"}

"""The perfectoid Tate curve: annulus rings, Cech complex, line bundles.

Every ring in the cover is described by families of normalized monomials,
e.g. ``a_n (qX)^n`` and ``b_n (q/X)^n`` on U0.  Restriction and gluing send a
normalized monomial to a single normalized monomial with a unit factor, so
the Cech differential splits into independent blocks, one per exponent
``n > 0`` plus one block of constants.  Cohomology is computed block by
block with exact linear algebra over K.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import (
    BadLambda,
    DenominatorMismatch,
    LatticeOverflow,
    PoleTooClose,
    PrecisionMismatch,
    UnsupportedDivisor,
    WindowOverflow,
)
from .lattice import (
    Divisor,
    JacobiClass,
    PeriodicDivisor,
    abel_jacobi_check,
    deg_q,
    jacobi_image,
)
from .scalar import INF, Precision, Scalar


class AnnulusId(enum.Enum):
    """The five affinoids of the cover; values are (inner, outer) radii as
    exponents of q, i.e. ``B(q^inner, q^outer)``."""

    U0 = (1, -1)
    U1 = (2, 1)
    U01plus = (1, 1)
    U01minus = (2, 2)
    U0plus = (-1, -1)


# family -> (monomial text, allowed exponent sign: "pos", "nonneg" or "all")
FAMILIES: dict[AnnulusId, dict[str, tuple[str, str]]] = {
    AnnulusId.U0: {"a": ("(qX)", "pos"), "b": ("(q/X)", "nonneg")},
    AnnulusId.U1: {"c": ("(X/q)", "nonneg"), "d": ("(q^2/X)", "pos"), "s": ("const", "shift")},
    AnnulusId.U01plus: {"e": ("(X/q)", "all")},
    AnnulusId.U01minus: {"f": ("(X/q^2)", "all")},
    AnnulusId.U0plus: {"g": ("(qX)", "all")},
}


@dataclass(frozen=True)
class CechElement:
    """Finite truncation of an element of one annulus ring.

    ``coeffs`` maps ``(family, n)`` to the coefficient of that family's
    normalized monomial to the power n.  Family ``s`` on U1 is the extra
    constant generator of the unit-shifted complex (keyed by the shift n).
    """

    ring: AnnulusId
    prec: Precision
    coeffs: Mapping[tuple[str, Fraction], Scalar] = field(default_factory=dict)

    def __post_init__(self):
        fams = FAMILIES[self.ring]
        clean = {}
        for (fam, n), v in self.coeffs.items():
            n = Fraction(n)
            if fam not in fams:
                raise ValueError(f"family {fam!r} does not belong to {self.ring.name}")
            kind = fams[fam][1]
            if not self.prec.in_lattice(n):
                raise LatticeOverflow(f"exponent {n} outside the lattice")
            if abs(n) > self.prec.xdeg:
                raise WindowOverflow(f"|{n}| exceeds xdeg={self.prec.xdeg}")
            if (kind == "pos" and n <= 0) or (kind == "nonneg" and n < 0):
                raise ValueError(f"{fam}_{n} is not a term of {self.ring.name}")
            v = Scalar.coerce(v, self.prec)
            if not v.is_zero():
                key = (fam, n)
                clean[key] = clean[key] + v if key in clean else v
        object.__setattr__(self, "coeffs", {k: v for k, v in clean.items() if not v.is_zero()})

    def get(self, fam: str, n) -> Scalar:
        return self.coeffs.get((fam, Fraction(n)), Scalar.zero(self.prec))

    def __add__(self, other):
        if other.ring != self.ring:
            raise ValueError("elements of different rings")
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return CechElement(self.ring, self.prec, out)

    def __neg__(self):
        return CechElement(self.ring, self.prec, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: Scalar) -> "CechElement":
        return CechElement(self.ring, self.prec, {k: v * c for k, v in self.coeffs.items()})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __str__(self):
        if not self.coeffs:
            return "0"
        fams = FAMILIES[self.ring]
        return " + ".join(f"({v})*{fams[f][0]}^({n})"
                          for (f, n), v in sorted(self.coeffs.items(), key=lambda kv: (kv[0][1], kv[0][0])))


def ring_element(ring: AnnulusId, coeffs: Mapping, prec: Precision) -> CechElement:
    return CechElement(ring, prec, dict(coeffs))


def glue_to_U01minus(x: CechElement) -> CechElement:
    """Transport from U0+ to U01- along ``X -> X/q^3``, i.e. ``qX -> X/q^2``."""
    if x.ring is not AnnulusId.U0plus:
        raise ValueError("gluing starts on U0plus")
    return CechElement(AnnulusId.U01minus, x.prec, {("f", n): v for (_, n), v in x.coeffs.items()})


def restrict_U0_outer(x: CechElement) -> CechElement:
    """U0 -> U0+: the ``(qX)^n`` terms."""
    return CechElement(AnnulusId.U0plus, x.prec,
                       {("g", n): v for (f, n), v in x.coeffs.items() if f == "a"})


def restrict_U0_inner(x: CechElement) -> CechElement:
    """U0 -> U01+: ``(q/X)^n = (X/q)^(-n)``, constants included."""
    return CechElement(AnnulusId.U01plus, x.prec,
                       {("e", -n): v for (f, n), v in x.coeffs.items() if f == "b"})


def restrict_U1_outer(x: CechElement) -> CechElement:
    """U1 -> U01+: the ``(X/q)^n`` terms, constants included."""
    return CechElement(AnnulusId.U01plus, x.prec,
                       {("e", n): v for (f, n), v in x.coeffs.items() if f == "c"})


def restrict_U1_inner(x: CechElement) -> CechElement:
    """U1 -> U01-: ``(q^2/X)^n = (X/q^2)^(-n)``, plus the shifted constant."""
    out = {}
    for (f, n), v in x.coeffs.items():
        if f == "d":
            out[("f", -n)] = v
        elif f == "s":
            out[("f", Fraction(0))] = out.get(("f", Fraction(0)), Scalar.zero(x.prec)) + v
    return CechElement(AnnulusId.U01minus, x.prec, out)


def boundary_d(f0: CechElement, f1: CechElement) -> tuple[CechElement, CechElement]:
    """Cech differential ``(f0, f1) -> (f0 - f1 on U01+, f0 - f1 on U01-)``.

    f0 reaches U01- through its outer boundary U0+ and the gluing map.
    """
    if f0.ring is not AnnulusId.U0 or f1.ring is not AnnulusId.U1:
        raise ValueError("boundary_d takes an element of U0 and one of U1")
    if f0.prec != f1.prec:
        raise PrecisionMismatch("elements carry different precisions")
    plus = restrict_U0_inner(f0) - restrict_U1_outer(f1)
    minus = glue_to_U01minus(restrict_U0_outer(f0)) - restrict_U1_inner(f1)
    return plus, minus


@dataclass(frozen=True)
class CechComplexData:
    q: Scalar
    prec: Precision
    shift: Fraction | None = None  # None: plain; n: U1 multiplied by X^n - 1

    def __post_init__(self):
        if self.shift is not None:
            n = Fraction(self.shift)
            if n == 0 or not self.prec.in_lattice(n):
                raise ValueError(f"shift {n} must be a nonzero lattice exponent")
            object.__setattr__(self, "shift", n)

    @property
    def variant(self) -> str:
        return "plain" if self.shift is None else f"unit_shifted:{self.shift}"


@dataclass(frozen=True)
class Block:
    exponent: Fraction
    source: list  # [(ring, family, n)]
    target: list  # [(ring, family, n)]
    matrix: list  # rows = target coordinates, columns = source basis


def _blocks(c: CechComplexData) -> list[Block]:
    prec = c.prec
    const_src = [(AnnulusId.U0, "b", Fraction(0)), (AnnulusId.U1, "c", Fraction(0))]
    if c.shift is not None:
        const_src.append((AnnulusId.U1, "s", c.shift))
    specs = [(Fraction(0), const_src,
              [(AnnulusId.U01plus, "e", Fraction(0)), (AnnulusId.U01minus, "f", Fraction(0))])]
    for n in prec.lattice(0, prec.xdeg)[1:]:
        specs.append((n,
                      [(AnnulusId.U0, "a", n), (AnnulusId.U0, "b", n),
                       (AnnulusId.U1, "c", n), (AnnulusId.U1, "d", n)],
                      [(AnnulusId.U01plus, "e", n), (AnnulusId.U01plus, "e", -n),
                       (AnnulusId.U01minus, "f", n), (AnnulusId.U01minus, "f", -n)]))
    one = Scalar.one(prec)
    blocks = []
    for n, src, tgt in specs:
        cols = []
        for ring, fam, k in src:
            u0 = CechElement(AnnulusId.U0, prec, {(fam, k): one} if ring is AnnulusId.U0 else {})
            u1 = CechElement(AnnulusId.U1, prec, {(fam, k): one} if ring is AnnulusId.U1 else {})
            plus, minus = boundary_d(u0, u1)
            img = {AnnulusId.U01plus: plus, AnnulusId.U01minus: minus}
            cols.append([img[r].get(f, k2) for r, f, k2 in tgt])
        matrix = [[cols[j][i] for j in range(len(src))] for i in range(len(tgt))]
        blocks.append(Block(n, src, tgt, matrix))
    return blocks


def _row_reduce(matrix: list[list[Scalar]]):
    """Reduced row echelon form over K; returns (rows, pivot columns)."""
    rows = [list(r) for r in matrix]
    pivots = []
    r = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        best = None
        for i in range(r, len(rows)):
            if not rows[i][col].is_zero():
                if best is None or rows[i][col].valuation() < rows[best][col].valuation():
                    best = i
        if best is None:
            continue
        rows[r], rows[best] = rows[best], rows[r]
        inv = rows[r][col].inv()
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and not rows[i][col].is_zero():
                fac = rows[i][col]
                rows[i] = [a - fac * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def rank_over_K(matrix: list[list[Scalar]]) -> int:
    if not matrix or not matrix[0]:
        return 0
    return len(_row_reduce(matrix)[1])


def cech_cohomology(c: CechComplexData) -> tuple[int, int]:
    """``(dim H^0, dim H^1)`` as kernel and cokernel dimensions of d."""
    h0 = h1 = 0
    for b in _blocks(c):
        rk = rank_over_K(b.matrix)
        h0 += len(b.source) - rk
        h1 += len(b.target) - rk
    return h0, h1


def cech_report(c: CechComplexData) -> dict:
    h0, h1 = cech_cohomology(c)
    prec = c.prec
    return {"p": prec.p, "imax": prec.imax, "xdeg": str(prec.xdeg), "q": c.q.to_machine(),
            "variant": c.variant, "h0": h0, "h1": h1, "block_count": len(_blocks(c))}


def _element_pair(src, vec, prec):
    c0, c1 = {}, {}
    for (ring, fam, n), v in zip(src, vec):
        if v.is_zero():
            continue
        (c0 if ring is AnnulusId.U0 else c1)[(fam, n)] = v
    return CechElement(AnnulusId.U0, prec, c0), CechElement(AnnulusId.U1, prec, c1)


def kernel_basis(c: CechComplexData) -> list[tuple[CechElement, CechElement]]:
    """A basis of ker d, assembled from the block nullspaces."""
    out = []
    zero = Scalar.zero(c.prec)
    for b in _blocks(c):
        rows, pivots = _row_reduce(b.matrix)
        free = [j for j in range(len(b.source)) if j not in pivots]
        for fj in free:
            vec = [zero] * len(b.source)
            vec[fj] = Scalar.one(c.prec)
            for r, pc in enumerate(pivots):
                vec[pc] = -rows[r][fj]
            out.append(_element_pair(b.source, vec, c.prec))
    return out


def lift(c: CechComplexData, plus: CechElement, minus: CechElement):
    """A preimage ``(f0, f1)`` of ``(plus, minus)`` under d, or None."""
    prec = c.prec
    zero = Scalar.zero(prec)
    img = {AnnulusId.U01plus: plus, AnnulusId.U01minus: minus}
    covered = set()
    sol_src, sol_vec = [], []
    for b in _blocks(c):
        rhs = [img[r].get(f, n) for r, f, n in b.target]
        covered.update((r, f, n) for r, f, n in b.target)
        aug = [row + [v] for row, v in zip(b.matrix, rhs)]
        rows, pivots = _row_reduce(aug)
        if len(b.source) in pivots:
            return None
        vec = [zero] * len(b.source)
        for r, pc in enumerate(pivots):
            vec[pc] = rows[r][-1]
        sol_src += b.source
        sol_vec += vec
    for ring, el in img.items():
        for (f, n) in el.coeffs:
            if (ring, f, n) not in covered:
                return None
    return _element_pair(sol_src, sol_vec, prec)


# -- line bundles ------------------------------------------------------------


@dataclass(frozen=True)
class EulerData:
    h0: int
    h1: int
    chi: int
    skyscraper_dim: int

    def as_tuple(self) -> tuple[int, int, int, int]:
        return self.h0, self.h1, self.chi, self.skyscraper_dim


def line_bundle_euler(D: Divisor, i: int, q: Scalar) -> EulerData:
    """Cohomology dimensions of the line bundle L(D) on the Tate curve."""
    prec = q.prec
    if not 0 <= i <= prec.imax:
        raise DenominatorMismatch(f"i={i} outside [0, {prec.imax}]")
    for m in D.terms.values():
        if (m * prec.p**i).denominator != 1:
            raise DenominatorMismatch(f"multiplicity {m} has denominator beyond p^{i}")
    deg = D.degree()
    if not D:
        h0, h1 = cech_cohomology(CechComplexData(q, prec))
        return EulerData(h0, h1, h0 - h1, 0)
    if deg > 0:
        sky = int(deg * prec.p**i)
        # reduce to L(1/p^i [e]), whose complex is the unit-shifted one
        _, h1 = cech_cohomology(CechComplexData(q, prec, Fraction(1, prec.p**i)))
        return EulerData(sky + h1, h1, sky, sky)
    raise UnsupportedDivisor("only D = 0 or deg D > 0 are supported")


# -- perfectoid elliptic curves ----------------------------------------------

_ROW0 = [  # (coefficient index or None for 1, x exponent, y exponent)
    (None, 0, 2), (0, 3, 0), (1, 1, 1), (2, 2, 0), (3, 0, 1), (4, 1, 0), (5, 0, 0)]


@dataclass(frozen=True)
class CurveEquation:
    i: int
    lambdas: tuple
    monomials: tuple  # ((coefficient, x exponent, y exponent), ...)

    def evaluate(self, x: Scalar, y: Scalar) -> Scalar:
        total = Scalar.zero(x.prec)
        for c, ex, ey in self.monomials:
            total = total + c * x**ex * y**ey
        return total

    def __str__(self):
        parts = []
        for c, ex, ey in self.monomials:
            if c.is_zero():
                continue
            mono = "*".join(s for s in (f"X^({ex})" if ex else "", f"Y^({ey})" if ey else "") if s)
            parts.append(f"({c})*{mono}" if mono else f"({c})")
        return " + ".join(parts) + " = 0"


def elliptic_family(i: int, lambdas, prec: Precision) -> CurveEquation:
    lambdas = tuple(Scalar.coerce(v, prec) for v in lambdas)
    if len(lambdas) != 6:
        raise ValueError("need six coefficients")
    if lambdas[0].is_zero():
        raise BadLambda("lambda_1 must be nonzero")
    if not 0 <= i <= prec.imax:
        raise LatticeOverflow(f"i={i} outside [0, {prec.imax}]")
    f = prec.p**i
    one = Scalar.one(prec)
    monos = tuple((one if k is None else lambdas[k], Fraction(ex, f), Fraction(ey, f))
                  for k, ex, ey in _ROW0)
    return CurveEquation(i, lambdas, monos)


def verify_family_substitution(e: CurveEquation) -> bool:
    """Substituting ``X -> X^(p^i)``, ``Y -> Y^(p^i)`` must give row 0."""
    prec = e.lambdas[0].prec
    f = prec.p**e.i
    subst = [(c, ex * f, ey * f) for c, ex, ey in e.monomials]
    base = elliptic_family(0, e.lambdas, prec).monomials
    return subst == list(base)


# -- the exact sequence at Div ----------------------------------------------


def exact_sequence_check(d: PeriodicDivisor) -> tuple[Fraction, JacobiClass, bool]:
    return deg_q(d), jacobi_image(d), abel_jacobi_check(d)


# -- Weierstrass p-function diagnostic --------------------------------------


@dataclass
class WpReport:
    mode: str
    T: Fraction
    terms: list  # [(n, val of wp term, val of wp' term)]
    wp_sum: Scalar
    wpprime_sum: Scalar
    verdict: str
    slice_vals: list  # [(n = 1/p^k, val)]
    periodicity_residual: object = None  # valuation, integers mode only

    def as_dict(self) -> dict:
        from .scalar import fmt_exp

        return {
            "mode": self.mode, "T": fmt_exp(self.T),
            "terms": [{"n": fmt_exp(n), "norm_exp": fmt_exp(v), "prime_norm_exp": fmt_exp(w)}
                      for n, v, w in self.terms],
            "verdict": self.verdict,
            "periodicity_residual": None if self.periodicity_residual is None
            else fmt_exp(self.periodicity_residual),
        }


def _wp_terms(x0: Scalar, q: Scalar, n: Fraction, pole_tol):
    y = q**n * x0
    one = Scalar.one(x0.prec)
    if y.valuation() < 0:
        # y/(1-y)^2 and y^2/(1-y)^3 in terms of z = 1/y, which stays integral
        # and so keeps full relative precision
        z = y.inv()
        den = one - z
        if den.is_zero() or den.valuation() > pole_tol:
            raise PoleTooClose(f"|1 - q^{n} X0| below tolerance")
        d2 = den * den
        return z / d2, -(z / (d2 * den))
    den = one - y
    if den.is_zero() or den.valuation() > pole_tol:
        raise PoleTooClose(f"|1 - q^{n} X0| below tolerance")
    d2 = den * den
    return y / d2, (y * y) / (d2 * den)


def wp_enumeration(prec: Precision, T, j: int | None) -> list[Fraction]:
    """Lattice exponents for the p-function sums, in the declared order:
    increasing |n|, then positive before negative, then by denominator."""
    T = Fraction(T)
    if j is None:
        ns = [Fraction(k) for k in range(-int(T), int(T) + 1)]
    else:
        if j > prec.imax:
            raise LatticeOverflow(f"denominator p^{j} exceeds p^{prec.imax}")
        f = prec.p**j
        ns = [Fraction(k, f) for k in range(-int(T * f), int(T * f) + 1)]
    return sorted(ns, key=lambda n: (abs(n), n < 0, n.denominator))


def wp_diagnostic(x0: Scalar, q: Scalar, T, j: int | None = None, pole_tol=None) -> WpReport:
    """Term norms and partial sums of the p-function and its derivative.

    ``j=None`` sums over the integers; otherwise over ``(1/p^j) Z``.
    """
    prec = x0.prec
    if x0.valuation() != 0:
        raise ValueError("the sample point must satisfy |X0| = 1")
    T = Fraction(T)
    pole_tol = prec.tprec / 4 if pole_tol is None else Fraction(pole_tol)
    ns = wp_enumeration(prec, T, j)
    terms = []
    wp = Scalar.zero(prec)
    wpp = Scalar.zero(prec)
    cache = {}
    for n in ns:
        a, b = _wp_terms(x0, q, n, pole_tol)
        cache[n] = a
        terms.append((n, a.valuation(), b.valuation()))
        wp, wpp = wp + a, wpp + b
    slice_vals = []
    if j is not None:
        slice_vals = [(Fraction(1, prec.p**k), cache[Fraction(1, prec.p**k)].valuation())
                      for k in range(j + 1) if Fraction(1, prec.p**k) <= T]
    if len(slice_vals) >= 2 and all(b[1] < a[1] for a, b in zip(slice_vals, slice_vals[1:])):
        verdict = "diverges"
    else:
        by_abs: dict[Fraction, object] = {}
        for n, v, _ in terms:
            if n:
                by_abs[abs(n)] = min(by_abs.get(abs(n), INF), v)
        seq = [by_abs[k] for k in sorted(by_abs)]
        verdict = "converges" if all(b > a for a, b in zip(seq, seq[1:])) else "diverges"
    residual = None
    if j is None:
        # sum over n of the same terms at X0/q is the sum shifted by n -> n - 1
        shifted = Scalar.zero(prec)
        x1 = x0 * q.inv()
        for n in ns:
            shifted = shifted + _wp_terms(x1, q, n, pole_tol)[0]
        residual = (shifted - wp).valuation()
    return WpReport("integers" if j is None else f"denominators:{j}", T, terms, wp, wpp,
                    verdict, slice_vals, residual)

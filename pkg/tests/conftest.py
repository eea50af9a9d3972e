from fractions import Fraction

import pytest
from hypothesis import strategies as st

from perfectoid.scalar import Precision, Scalar

PREC = Precision()


@pytest.fixture
def prec():
    return PREC


@pytest.fixture
def q(prec):
    return Scalar.t(1, prec)


def scalars(prec=PREC, lo=0, hi=None, max_terms=6):
    """Hypothesis strategy: scalars with exponents in [lo, hi)."""
    hi = prec.tprec if hi is None else Fraction(hi)
    exps = [e for e in prec.lattice(lo, hi) if e < hi]
    return st.dictionaries(st.sampled_from(exps), st.integers(1, prec.p - 1),
                           max_size=max_terms).map(lambda d: Scalar(prec, d))


def units(prec=PREC):
    return st.tuples(st.integers(1, prec.p - 1), scalars(prec, Fraction(1, prec.denom))).map(
        lambda cd: Scalar.from_int(cd[0], prec) + cd[1])

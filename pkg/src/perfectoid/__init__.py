"""Exact computations in perfectoid Tate algebras over the perfection of F_p((t))."""

from .errors import ParseError, PerfectoidError
from .scalar import Precision, Scalar, q_power_class
from .series import PerfSeries, RationalFn, weierstrass_prepare

__all__ = [
    "ParseError",
    "PerfSeries",
    "PerfectoidError",
    "Precision",
    "RationalFn",
    "Scalar",
    "q_power_class",
    "weierstrass_prepare",
]

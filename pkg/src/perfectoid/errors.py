"""Exception hierarchy shared by every module."""


class PerfectoidError(Exception):
    """Base class for kernel errors (everything except input parsing)."""


class PrecisionMismatch(PerfectoidError):
    pass


class DivisionByZero(PerfectoidError, ZeroDivisionError):
    pass


class LatticeOverflow(PerfectoidError):
    """An exponent would need a denominator larger than p**imax."""


class NotIntegral(PerfectoidError):
    pass


class BadModulus(PerfectoidError):
    pass


class WindowMismatch(PerfectoidError):
    pass


class WindowOverflow(PerfectoidError):
    pass


class NotNormalized(PerfectoidError):
    pass


class ZeroReduction(PerfectoidError):
    pass


class NonTermination(PerfectoidError):
    pass


class Cancelled(PerfectoidError):
    pass


class UnsupportedPoint(PerfectoidError):
    pass


class PoolExhausted(PerfectoidError):
    pass


class NotTheta(PerfectoidError):
    pass


class DenominatorMismatch(PerfectoidError):
    pass


class UnsupportedDivisor(PerfectoidError):
    pass


class BadLambda(PerfectoidError):
    pass


class PoleTooClose(PerfectoidError):
    pass


class ParseError(ValueError):
    """Malformed textual or machine-form input."""

"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class TwoStepError(Exception):
    """Base class for every error raised by this package."""


class InputError(TwoStepError, ValueError):
    """Bad user input: malformed files, unknown names, invalid parameters."""


class UnknownMetric(InputError):
    pass


class UnknownLoss(InputError):
    pass


class InvalidParam(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class EmptySample(InputError):
    pass


class EmptyPartition(InputError):
    pass


class SchemaMismatch(InputError):
    pass


class DegenerateDenominator(TwoStepError, ArithmeticError):
    pass


class NonPositiveGamma(TwoStepError, ArithmeticError):
    pass


class EtaAtBoundary(TwoStepError, ArithmeticError):
    pass


class AllCandidatesDegenerate(TwoStepError, ArithmeticError):
    pass


class NonFiniteLoss(TwoStepError, ArithmeticError):
    pass


class InvariantViolation(TwoStepError, AssertionError):
    """A property that must hold by construction was observed to fail."""


class ParseError(InputError):
    """Parse failure tied to a 1-based line number."""

    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class MalformedLine(ParseError):
    pass


class NonMonotoneIndex(ParseError):
    pass


class NonFiniteValue(ParseError):
    pass

"""Exception hierarchy.

Errors fall in two families that the command line maps to distinct exit
codes: :class:`InputRejected` (the job is invalid, exit 1) and
:class:`InternalFailure` (an invariant broke or a resource cap was hit,
exit 2).
"""


class StableReductionError(Exception):
    """Base class for every error raised by this package."""

    stage = None


class InputRejected(StableReductionError):
    pass


class InternalFailure(StableReductionError):
    pass


# -- field construction ------------------------------------------------------

class NotPrime(InputRejected):
    pass


class ReducibleModulus(InputRejected):
    pass


class IncompatibleExtension(InputRejected):
    pass


class NonIntegral(InputRejected):
    pass


# -- input validation ----------------------------------------------------------

class ParseError(InputRejected):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class PreconditionViolation(InputRejected):
    pass


class NotEquidistant(InputRejected):
    pass


class DegreeDivisibleByP(InputRejected):
    pass


class MultiplicityDivisibleByP(InputRejected):
    pass


class NotGenus2Case(InputRejected):
    pass


# -- internal consistency ------------------------------------------------------

class NonPolynomialTail(InternalFailure):
    pass


class DegreeMismatch(InternalFailure):
    pass


class NonIntegralMonodromyPolynomial(InternalFailure):
    pass


class PrecisionCapExceeded(InternalFailure):
    pass


class EscalationLimit(InternalFailure):
    pass


class ResidueFieldTooSmall(InternalFailure):
    pass


class NonUnitS0AtCenter(InternalFailure):
    pass


class InconsistentRadiiInClass(InternalFailure):
    pass


class InternalInvariantViolation(InternalFailure):
    pass


class EmptyTail(InternalFailure):
    pass


class UnrecognizedShape(InternalFailure):
    pass

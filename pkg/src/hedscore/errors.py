"""Exception hierarchy.

Every error raised for bad input derives from :class:`HedError`, which is a
``ValueError``. Errors that mean "the data violates a documented invariant"
additionally derive from :class:`InvariantViolation`; the command line maps
those to exit status 3.
"""


class HedError(ValueError):
    pass


class InvariantViolation(HedError):
    """Input parsed fine but breaks a stated invariant."""


class ProbabilityRangeError(InvariantViolation):
    pass


class IrregularGridError(InvariantViolation):
    pass


class EmptyPreOnsetWindow(InvariantViolation):
    pass


class DegenerateWindow(InvariantViolation):
    pass


class InvalidDecay(InvariantViolation):
    pass


class NonPositiveBudget(InvariantViolation):
    pass


class NonPositiveBeta(InvariantViolation):
    pass


class InvalidPartition(InvariantViolation):
    pass


class NoTransitions(InvariantViolation):
    pass


class WindowTooShort(InvariantViolation):
    pass


class InvalidRegimeLog(InvariantViolation):
    pass


class BlockTooLong(InvariantViolation):
    pass


class MismatchedWindows(InvariantViolation):
    pass


class InvalidBootstrapConfig(InvariantViolation):
    pass


class EmptyCurve(InvariantViolation):
    pass


class DelayExceedsWindow(InvariantViolation):
    pass


class InvalidParameter(InvariantViolation):
    pass


class EmbeddingFailure(HedError):
    pass


class ZeroLikelihood(HedError):
    pass

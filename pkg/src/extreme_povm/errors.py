"""Exception hierarchy shared by all modules."""


class PovmError(Exception):
    """Base class for every error raised by this package."""


class InvalidPovm(PovmError, ValueError):
    """Input operators do not form a POVM."""

    def __init__(self, message, outcome=None, magnitude=None):
        super().__init__(message)
        self.outcome = outcome
        self.magnitude = magnitude


class NotHermitian(InvalidPovm):
    pass


class NotPositive(InvalidPovm):
    pass


class NotNormalized(InvalidPovm):
    pass


class DecompositionFailure(PovmError):
    pass


class SingularSum(PovmError):
    """The operators to renormalize do not sum to an invertible operator."""


class PreconditionError(PovmError, ValueError):
    """An operation was called outside its domain."""


class NotExtreme(PreconditionError):
    pass


class DegenerateKernel(PovmError):
    pass


class NoFeasibleScale(PovmError):
    pass


class RankBudgetExhausted(PreconditionError):
    pass


class InvalidOutcomeCount(PreconditionError):
    pass


class CannotComplete(PovmError):
    pass


class BadPartition(PreconditionError):
    pass


class SizeGuard(PreconditionError):
    pass


class NotSymmetric(PreconditionError):
    pass


class CertificationFailed(PovmError):
    pass


class NoSymmetricSolution(PovmError):
    pass


class RankMiss(PovmError):
    pass


class ConditionViolated(PreconditionError):
    """A rank vector fails the necessary extremality conditions."""

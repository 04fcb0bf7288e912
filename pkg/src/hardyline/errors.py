"""Exception hierarchy shared by every module."""


class HardyError(Exception):
    """Base class for all package errors."""


class DomainError(HardyError, ValueError):
    """An argument lies outside the documented domain."""


class SpecError(DomainError):
    """A weight specification string could not be parsed."""


class OutOfTable(DomainError):
    """A table weight without tail model was queried past its data."""


class TailUnknown(HardyError):
    """A tail sum was requested for a weight whose tail is not modelled."""


class Inconclusive(HardyError):
    """A supremum could not be certified from the scanned window."""


class ZeroDenominator(HardyError, ZeroDivisionError):
    """The weighted p-norm of a test vector vanishes."""


class UnsupportedAlpha(DomainError):
    """The exponent alpha has no sharp constant of the requested kind."""


class PrefixViolation(DomainError):
    """A test vector does not vanish on the required prefix."""


class NotConverged(HardyError):
    """An iterative solver stopped before reaching its tolerance.

    The best iterate is kept on ``result`` so callers can still report it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class IllConditioned(HardyError):
    """A least-squares design matrix is too ill-conditioned to trust."""


class NotFound(HardyError):
    """A scan finished without locating the requested witness."""

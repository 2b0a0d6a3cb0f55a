"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes): bad input or an
unmet precondition (``InputError``, a ``ValueError``) and numerical failure
(``NumericalError``, an ``ArithmeticError``).
"""


class PastEntropyError(Exception):
    """Base class for every error raised by this package."""


class InputError(PastEntropyError, ValueError):
    """Invalid argument or violated precondition."""


class NumericalError(PastEntropyError, ArithmeticError):
    """A numerical procedure failed to deliver the requested accuracy."""


class DomainError(InputError):
    pass


class PreconditionError(InputError):
    pass


class DegenerateConditionError(InputError):
    """The conditioning event has (numerically) zero probability."""


class BracketError(InputError):
    """Root bracket without a sign change."""


class InsufficientDataError(InputError):
    pass


class DegenerateSampleError(InputError):
    pass


class AccuracyError(NumericalError):
    """Tolerance not met within the iteration/depth budget.

    ``partial`` holds the best value obtained (a float for quadrature, a
    ``(lo, hi)`` bracket for root finding) and ``err_est`` its error estimate.
    """

    def __init__(self, message, partial=None, err_est=None):
        super().__init__(message)
        self.partial = partial
        self.err_est = err_est


class InconsistentCurveError(NumericalError):
    """A past-entropy curve admits no reversed hazard rate at some time."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class ReconstructionError(NumericalError):
    pass

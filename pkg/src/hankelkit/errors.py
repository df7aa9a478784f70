"""Exception types shared across the library.

Every rejection carries a message naming the offending parameter or
exponent, so CLI and harness layers can report machine-readable errors.
"""


class HankelKitError(Exception):
    """Base class for all library errors."""


class UnsupportedRangeError(HankelKitError, ValueError):
    """Argument outside the supported evaluation envelope."""


class UnsupportedFunctionError(HankelKitError, ValueError):
    """Function lacks metadata (derivatives, decay class) required by an operation."""


class DivergenceError(HankelKitError, ValueError):
    """Requested integral diverges; the message names the offending exponent."""


class InvalidCaseError(HankelKitError, ValueError):
    """Parameter tuple violates the hypotheses of the inequality being checked."""


class TruncationError(HankelKitError, RuntimeError):
    """Quadrature failed to converge within the configured segment budget.

    Carries the partial sum and a bound on the neglected tail rather than
    returning a silent answer.
    """

    def __init__(self, message, partial_sum=None, tail_bound=None):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.tail_bound = tail_bound

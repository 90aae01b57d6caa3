"""Exception types shared across the package.

The CLI maps these onto exit codes: 2 for bad parameters or usage,
3 for domain failures (zero-measure cylinders and the like), 4 for
capacity guards.
"""


class ReturnStatError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ParameterError(ReturnStatError, ValueError):
    """A parameter lies outside its admissible range."""

    exit_code = 2


class UsageError(ParameterError):
    """An operation was called with unusable input (e.g. empty samples)."""


class DomainError(ReturnStatError, ArithmeticError):
    """The requested quantity is undefined, e.g. a ratio with a zero-measure denominator."""

    exit_code = 3


class ProbabilityUnderflow(DomainError):
    """A strictly positive probability is too small for double precision.

    Raised instead of silently returning 0.0 so that underflow is never
    confused with a genuinely zero-measure cylinder.
    """


class CapacityError(ReturnStatError, MemoryError):
    """An exact enumeration would exceed its configured size guard."""

    exit_code = 4


class UnsupportedOperation(ReturnStatError, NotImplementedError):
    """The model does not provide the requested closed form."""

    exit_code = 3

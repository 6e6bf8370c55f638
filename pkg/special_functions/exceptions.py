"""
Exceptions shared by every app of the project.

WHAT THIS FILE DOES:
- SpikedFError is the common base, so callers can catch everything at once
- InvalidParameterError marks contract violations (bad indices, bad configs)
- NumericalInstabilityError marks results that cannot be trusted

The management commands turn these into exit codes:
InvalidParameterError -> 2, NumericalInstabilityError -> 3.
"""


class SpikedFError(Exception):
    """Base class of all errors raised by the library."""


class InvalidParameterError(SpikedFError, ValueError):
    """An argument violates the contract of the operation."""


class NumericalInstabilityError(SpikedFError, ArithmeticError):
    """A computed value lost its precision or left its valid range."""


class NotPositiveDefiniteError(NumericalInstabilityError):
    """Cholesky met a pivot that is not safely positive."""


class ConvergenceError(NumericalInstabilityError):
    """An iterative method (eigenvalues, root bracketing) did not converge."""

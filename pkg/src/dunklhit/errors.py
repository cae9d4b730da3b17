"""Exception hierarchy shared by all modules.

Validation failures (bad input that violates a documented precondition) derive
from ``ValidationError``; numerical failures (series that do not settle, budgets
that run out) derive from ``ConvergenceError``.  The CLI maps the two branches
to distinct exit codes.
"""


class DunklHitError(Exception):
    """Base class.  ``where`` names the operation whose contract was violated."""

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where

    def __str__(self):
        msg = super().__str__()
        return f"[{self.where}] {msg}" if self.where else msg


class ValidationError(DunklHitError, ValueError):
    pass


class DomainError(ValidationError):
    pass


class BoundaryError(ValidationError):
    pass


class RankTooLarge(ValidationError):
    pass


class NonHomogeneousError(ValidationError):
    pass


class OddDimension(ValidationError):
    pass


class OddRank(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class PoleError(ValidationError):
    pass


class NoHittingError(ValidationError):
    """Every index is nonnegative, so the boundary is never reached."""


class ConvergenceError(DunklHitError, ArithmeticError):
    pass


class DivergenceError(ConvergenceError):
    pass


class ExtrapolationUnstable(ConvergenceError):
    pass


class IntegrationBudgetExceeded(ConvergenceError):
    pass


class SingularCalibration(ConvergenceError):
    pass


class ExactDivisionError(DunklHitError, ArithmeticError):
    """A supposedly exact polynomial division left a remainder (internal bug)."""

"""Exception hierarchy shared by every dforge module."""


class DforgeError(Exception):
    """Base class for all library errors."""


class DomainError(DforgeError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class CapacityError(DforgeError):
    """A computation would exceed a configured size cap."""


class ConvergenceError(DforgeError, ArithmeticError):
    """An iterative numerical routine failed to converge.

    The ``diagnostics`` attribute carries whatever the solver reported
    (iteration counts, residuals) so callers can serialize it.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})

"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operands have incompatible or unexpected shapes."""


class DomainError(ValueError):
    """An input value lies outside the documented domain."""


class CapacityError(ValueError):
    """The request exceeds a hard size cap (factorial/exponential cost)."""


class StructuralError(RuntimeError):
    """Input structure rules out the operation (e.g. an all-zero row)."""


class ConvergenceError(RuntimeError):
    """Iteration hit its budget without reaching the target. Carries the
    best result achieved so far in ``result``."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NumericError(RuntimeError):
    """A numerical routine failed (non-convergent SVD, non-finite output)."""

"""Exception types raised across vinolab."""


class VinolabError(Exception):
    """Base class for all package errors."""


class PreconditionError(VinolabError, ValueError):
    """An argument falls outside the domain of the requested operation."""


class InstanceTooLarge(VinolabError):
    """The instance exceeds the enumeration limit or the memory budget."""

    def __init__(self, message, required=None, budget=None):
        super().__init__(message)
        self.required = required
        self.budget = budget


class ResolutionError(VinolabError, ValueError):
    """A quadrature grid or lattice is too coarse for the requested accuracy."""


class InsufficientPoints(VinolabError, ValueError):
    """Too few data points to fit a growth exponent."""

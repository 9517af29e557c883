"""Exception types shared across the package."""


class SpecgapError(Exception):
    """Base class for all package-specific errors."""


class ParseError(SpecgapError):
    """An input document does not match the expected schema."""


class InputError(SpecgapError, ValueError):
    """An argument is out of range or refers to nonexistent data."""


class ValidationError(SpecgapError):
    """A graph or chain violates a structural invariant."""


class ConvergenceError(SpecgapError):
    """An iterative solver failed to reach the requested accuracy."""


class ReductionError(SpecgapError):
    """Internal consistency failure inside the chain reduction pipeline."""

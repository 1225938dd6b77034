"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Bad user input: malformed spec, grid, or state."""


class ResourceLimitError(RuntimeError):
    """A size guard was exceeded (e.g. full-Hilbert-space construction)."""


class NumericalError(RuntimeError):
    """A numerical routine failed to meet its accuracy contract."""

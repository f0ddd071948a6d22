"""Exception types shared across the package."""


class SparseoutError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(SparseoutError, ValueError):
    pass


class InvalidHyperparameterError(SparseoutError, ValueError):
    pass


class InvalidInputError(SparseoutError, ValueError):
    pass


class UndefinedInputError(InvalidInputError):
    """Input for which the requested quantity is mathematically undefined."""


class StateError(SparseoutError, RuntimeError):
    """A backward pass was requested without the forward cache it needs."""


class FormatError(SparseoutError, ValueError):
    """Malformed binary input file."""

"""Exception types shared across the package."""


class CofinalError(Exception):
    """Base class for all errors raised by this package."""


class InputError(CofinalError, ValueError):
    """Malformed or out-of-range input (bad generator index, arity mismatch, ...)."""


class PresentationSyntaxError(InputError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownGroupError(InputError):
    """A catalog name that is not in the catalog."""


class InvalidQuotientError(InputError):
    """A relator does not map to zero under a proposed quotient map."""


class WitnessError(InputError):
    """A largeness or fibering witness failed its validity check."""


class UnsupportedRepresentationError(CofinalError):
    """An operation was asked to act on a term it cannot materialize."""


class ResourceError(CofinalError):
    """A configured resource cap was exceeded."""

    def __init__(self, message: str, cap: int | None = None):
        self.cap = cap
        if cap is not None:
            message = f"{message} (cap {cap})"
        super().__init__(message)

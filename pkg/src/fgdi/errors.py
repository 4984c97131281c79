"""Exception types shared across the package."""


class FgdiError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(FgdiError):
    """A file or payload does not match the expected schema."""


class DataError(FgdiError):
    """Input data violates an invariant (non-finite values, duplicates, ...)."""


class ArgumentError(FgdiError, ValueError):
    """An argument is outside its documented domain."""


class DegenerateError(FgdiError):
    """The computation is undefined for this input (zero variance, all ties, ...)."""

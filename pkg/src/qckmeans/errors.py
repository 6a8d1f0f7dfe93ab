"""Exception types raised across the package."""


class QcKmeansError(Exception):
    """Base class for all package errors."""


class InvalidDataError(QcKmeansError, ValueError):
    """Input data is malformed (non-finite entries, wrong shape)."""


class InvalidParameterError(QcKmeansError, ValueError):
    """A parameter is outside its admissible range."""


class CapacityError(QcKmeansError):
    """A register or enumeration would exceed the configured capacity."""


class EmptyClusterError(QcKmeansError):
    """A cluster has no assigned points."""

    def __init__(self, group):
        super().__init__(f"cluster {group} is empty")
        self.group = group


class ParseError(QcKmeansError, ValueError):
    """A CSV file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line

"""Exception types raised by the package."""


class MrdpmError(Exception):
    """Base class for all package errors."""


class InvalidInputError(MrdpmError, ValueError):
    """Input data violates a documented precondition."""


class InvalidStateError(MrdpmError, ValueError):
    """A mixture state is inconsistent with itself or with its track."""


class DomainError(MrdpmError, ValueError):
    """A numeric argument lies outside the domain of the function."""


class SizeError(MrdpmError, ValueError):
    """An instance is too large for exhaustive enumeration."""


class TrackFormatError(InvalidInputError):
    """A track file could not be parsed."""

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class DuplicatePositionError(TrackFormatError):
    """The same position appears twice in a track file."""

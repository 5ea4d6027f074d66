"""Exception types shared across the toolkit."""


class StepcapError(Exception):
    """Base class for all toolkit errors."""


class ParseError(StepcapError):
    """A corpus or artifact file could not be parsed.

    Carries the offending line number when one is known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(StepcapError):
    """Parsed data violates a corpus invariant."""


class ConfigError(StepcapError):
    """An experiment configuration is invalid or references missing paths."""


class TrainingDivergedError(StepcapError):
    """Training loss exceeded the divergence threshold for too long."""

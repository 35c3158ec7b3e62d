class VwapspError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(VwapspError):
    """Malformed text input (graph file, expression, weights file)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(VwapspError):
    """Input is well-formed but violates a semantic constraint."""


class InvalidPartition(VwapspError):
    """A proposed modular partition contains a set that is not a module."""

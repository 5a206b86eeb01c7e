"""
Exception hierarchy shared by every package.
"""

from typing import Optional


class KnockoffError(Exception):
    """Root of all errors raised by the factor-selection engine."""


class DomainError(KnockoffError, ValueError):
    """A precondition failed or the numeric input is degenerate."""


class FormatError(DomainError):
    """An input file could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(KnockoffError):
    """The run configuration is invalid."""

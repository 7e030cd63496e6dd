"""Exception hierarchy.

Everything raised on purpose derives from MultimaxError so callers (and the
CLI) can tell our failures from genuine bugs.  ValidationError covers bad
input files and manifests; AnalysisError covers misuse of analysis operations
on otherwise well-formed data; InvariantViolation means an internal
postcondition failed and the result cannot be trusted.
"""

from __future__ import annotations


class MultimaxError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(MultimaxError):
    """Malformed input: CSV rows, manifests, unusable file contents."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}: " if line is None else f"{path}:{line}: "
        super().__init__(where + message)
        self.path = path
        self.line = line


class AlignmentError(MultimaxError):
    """Two vectors that must share an instance index do not."""


class UndefinedMetricError(MultimaxError):
    """A requested metric has a zero denominator for this confusion matrix."""


class AnalysisError(MultimaxError):
    """An analysis operation was called with unusable arguments."""


class InvariantViolation(MultimaxError):
    """A guaranteed postcondition failed; indicates a bug, not bad input."""

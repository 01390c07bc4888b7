"""Exception hierarchy shared by every propp module."""

from __future__ import annotations


class ProppError(Exception):
    """Base class for all propp errors."""


class DomainError(ProppError, ValueError):
    """A numeric argument lies outside the function's domain."""


class InputError(ProppError, ValueError):
    """Invalid data or configuration supplied by the caller."""


class DatasetParseError(InputError):
    """A dataset file could not be parsed.

    ``line`` is the 1-based file line (header is line 1), ``column`` the
    offending column name; either may be None when not applicable.
    """

    def __init__(self, message: str, *, line: int | None = None, column: str | None = None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column '{column}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


class DiagnosticUnavailableError(ProppError):
    """A balance diagnostic cannot be computed for the given weights."""


class MethodFailure(ProppError):
    """A borrowing method could not produce a posterior."""


class SamplerDegeneracyError(MethodFailure):
    """Rejection sampling accepted too few proposals to be trusted."""


class StratificationError(MethodFailure):
    """Propensity-score strata could not be formed or populated."""

"""Diagnostic records shared by the parser and the validators."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    """A single finding, optionally anchored to a 1-based source position.

    ``source`` is excluded from equality so that diagnostics produced from the
    same text under different file names still compare equal.
    """

    severity: Severity
    message: str
    line: int | None = None
    column: int | None = None
    source: str | None = field(default=None, compare=False)

    def render(self) -> str:
        prefix = self.source or "<input>"
        if self.line is not None:
            prefix += f":{self.line}:{self.column}"
        return f"{prefix}: {self.severity.value}: {self.message}"


def error(message: str, line: int | None = None, column: int | None = None,
          source: str | None = None) -> Diagnostic:
    return Diagnostic(Severity.ERROR, message, line, column, source)


def warning(message: str, line: int | None = None, column: int | None = None,
            source: str | None = None) -> Diagnostic:
    return Diagnostic(Severity.WARNING, message, line, column, source)


def sort_key(diag: Diagnostic) -> tuple:
    """Order diagnostics by (line, column), then message for determinism."""
    return (diag.line or 0, diag.column or 0, diag.severity.value, diag.message)


def has_errors(diags) -> bool:
    return any(d.severity is Severity.ERROR for d in diags)


def only_errors(diags) -> list[Diagnostic]:
    return [d for d in diags if d.severity is Severity.ERROR]

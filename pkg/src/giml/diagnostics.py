"""Diagnostics shared by the parser, the analyzer and the runtime."""

from __future__ import annotations

from dataclasses import dataclass

ERROR = "error"
WARNING = "warning"
INFO = "info"


@dataclass(frozen=True)
class Diagnostic:
    """One finding about a document, with a stable machine readable code."""

    severity: str
    code: str
    message: str
    line: int = 0
    col: int = 0
    suggestion: str = ""

    def format(self) -> str:
        where = f"{self.line}:{self.col}: " if self.line else ""
        return f"{self.severity}[{self.code}] {where}{self.message}"


def errors(diagnostics: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diagnostics if d.severity == ERROR]


def has_errors(diagnostics: list[Diagnostic]) -> bool:
    return any(d.severity == ERROR for d in diagnostics)

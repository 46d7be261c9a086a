import difflib
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from ..errors import describe_code


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    line: int
    col: int
    message: str
    ident: str | None = None
    code: str = "E100"

    @classmethod
    def error(cls, code: str, line: int, col: int, message: str, ident: str | None = None) -> "Diagnostic":
        return cls(Severity.ERROR, line, col, message, ident, code)

    @classmethod
    def warning(cls, code: str, line: int, col: int, message: str, ident: str | None = None) -> "Diagnostic":
        return cls(Severity.WARNING, line, col, message, ident, code)

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def as_dict(self) -> dict:
        return {
            "severity": self.severity.value,
            "code": self.code,
            "name": describe_code(self.code),
            "line": self.line,
            "col": self.col,
            "message": self.message,
            "ident": self.ident,
        }

    def __str__(self):
        return f"{self.line}:{self.col}: {self.severity.value} {self.code} {self.message}"


def suggest(word: str, choices: Iterable[str]) -> str | None:
    match = difflib.get_close_matches(word, list(choices), n=1, cutoff=0.6)
    return match[0] if match else None


def with_suggestion(message: str, word: str, choices: Iterable[str]) -> str:
    hint = suggest(word, choices)
    return f"{message} (did you mean {hint!r}?)" if hint else message


def errors(diags: Iterable[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diags if d.is_error]


def sort_diagnostics(diags: Iterable[Diagnostic]) -> list[Diagnostic]:
    return sorted(diags, key=lambda d: (d.line, d.col, d.code))

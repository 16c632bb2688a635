from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int = 1

    def location(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class ParseError:
    """A positioned lexical, syntax or resolution error."""

    span: SourceSpan
    message: str
    expected: Tuple[str, ...] = ()
    related: Optional[SourceSpan] = None

    def __str__(self) -> str:
        return f"{self.span.location()}: {self.message}"


def source_line(lines: Sequence[str], line_number: int) -> str:
    """Return the 1-based line, or an empty string past the end of the source."""
    if 1 <= line_number <= len(lines):
        return lines[line_number - 1].rstrip("\r")
    return ""


def caret_underline(column: int, length: int) -> str:
    return " " * max(column - 1, 0) + "^" * max(length, 1)


def _excerpt(lines: Sequence[str], span: SourceSpan) -> str:
    return f"{source_line(lines, span.line)}\n{caret_underline(span.column, span.length)}\n"


def format_errors(errors: Sequence[ParseError], source: str) -> str:
    """Render one ``file:line:col: message`` block per error with the source line and carets.

    An error with a related site (the first declaration of a duplicate) gets a
    second ``note`` excerpt underlining that site.
    """
    lines = source.split("\n")
    ordered = sorted(errors, key=lambda error: (error.span.line, error.span.column))
    blocks: List[str] = []
    for error in ordered:
        blocks.append(f"{error}\n{_excerpt(lines, error.span)}")
        if error.related is not None:
            note = f"{error.related.location()}: note: first declared here\n"
            blocks.append(note + _excerpt(lines, error.related))
    return "".join(blocks)

import logging
import re
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

from .model import UNPRINTABLE_NAME_CHARACTERS
from .source import ParseError, SourceSpan

logger = logging.getLogger(__name__)


class TokenKind(Enum):
    NAME = "name"
    STRING = "string"
    LBRACE = "'{'"
    RBRACE = "'}'"
    LPAREN = "'('"
    RPAREN = "')'"
    COLON = "':'"
    COMMA = "','"
    ARROW = "'->'"
    EOF = "end of input"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    value: str
    span: SourceSpan

    @property
    def is_name(self) -> bool:
        return self.kind in (TokenKind.NAME, TokenKind.STRING)

    def describe(self) -> str:
        if self.kind is TokenKind.EOF:
            return "end of input"
        if self.kind is TokenKind.STRING:
            return f'"{self.value}"'
        return f"'{self.value}'"


PUNCTUATION = {
    "{": TokenKind.LBRACE,
    "}": TokenKind.RBRACE,
    "(": TokenKind.LPAREN,
    ")": TokenKind.RPAREN,
    ":": TokenKind.COLON,
    ",": TokenKind.COMMA,
    "->": TokenKind.ARROW,
}

TOKEN_PATTERN = re.compile(
    r"""
    (?P<space>\s+)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*.*?\*/)
  | (?P<open_comment>/\*)
  | (?P<string>"(?:[^"\\\n]|\\[^\n])*")
  | (?P<open_string>"[^\n]*)
  | (?P<name>\w+)
  | (?P<punct>->|[{}():,])
    """,
    re.VERBOSE | re.DOTALL,
)
ESCAPE_PATTERN = re.compile(r"\\(.)")


class _Positions:
    """Translate character offsets into 1-based line/column pairs."""

    def __init__(self, file_name: str, source: str):
        self.file_name = file_name
        self.line_starts = [0] + [match.end() for match in re.finditer("\n", source)]

    def span(self, offset: int, length: int) -> SourceSpan:
        line_index = bisect_right(self.line_starts, offset) - 1
        column = offset - self.line_starts[line_index] + 1
        return SourceSpan(self.file_name, line_index + 1, column, max(length, 1))


def _unescape(body: str) -> Tuple[str, List[str]]:
    bad = [char for char in ESCAPE_PATTERN.findall(body) if char not in ('"', "\\")]
    return ESCAPE_PATTERN.sub(lambda match: match.group(1), body), bad


def lex(source: str, file_name: str) -> Tuple[List[Token], List[ParseError]]:
    """Split source text into tokens, collecting every lexical error."""
    positions = _Positions(file_name, source)
    tokens: List[Token] = []
    errors: List[ParseError] = []
    offset = 0
    while offset < len(source):
        match = TOKEN_PATTERN.match(source, offset)
        if match is None:
            errors.append(
                ParseError(positions.span(offset, 1), f"unexpected character {source[offset]!r}")
            )
            offset += 1
            continue
        group = match.lastgroup
        text = match.group()
        span = positions.span(offset, len(text))
        if group == "string":
            value, bad_escapes = _unescape(text[1:-1])
            for char in bad_escapes:
                errors.append(ParseError(span, f"unknown escape sequence '\\{char}' in string"))
            if UNPRINTABLE_NAME_CHARACTERS.search(value):
                errors.append(ParseError(span, "unprintable character in string"))
            tokens.append(Token(TokenKind.STRING, value, span))
        elif group == "open_string":
            errors.append(ParseError(positions.span(offset, 1), "unterminated string"))
        elif group == "open_comment":
            errors.append(ParseError(span, "unterminated block comment"))
            text = source[offset:]
        elif group == "name":
            tokens.append(Token(TokenKind.NAME, text, span))
        elif group == "punct":
            tokens.append(Token(PUNCTUATION[text], text, span))
        offset += len(text)
    tokens.append(Token(TokenKind.EOF, "", positions.span(len(source), 1)))
    logger.debug("lexed %s: %d token(s), %d error(s)", file_name, len(tokens), len(errors))
    return tokens, errors

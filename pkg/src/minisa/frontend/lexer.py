"""Lexer for MiniC."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from minisa.errors import LexicalError

KEYWORDS = frozenset({"int", "void", "if", "else", "while", "for", "return"})

# Longest punctuators first so "<=" wins over "<".
PUNCTUATORS = (
    "+=", "-=", "*=", "/=", "<=", ">=", "==", "!=", "&&", "||",
    "(", ")", "{", "}", "[", "]", ";", ",", "=", "+", "-", "*", "/", "%",
    "<", ">", "!", "&",
)

INT64_MAX = 2**63 - 1


class TokenKind(enum.Enum):
    IDENTIFIER = "Identifier"
    INT_LITERAL = "IntLiteral"
    KEYWORD = "Keyword"
    PUNCTUATOR = "Punctuator"
    EOF = "EndOfFile"


@dataclass(frozen=True)
class SourceLocation:
    file: str
    line: int
    column: int
    offset: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    loc: SourceLocation

    def __repr__(self) -> str:
        return f"Token({self.kind.value}, {self.text!r}, {self.loc})"


class _Cursor:
    def __init__(self, source: str, file: str):
        self.src = source
        self.file = file
        self.pos = 0
        self.line = 1
        self.col = 1

    def loc(self) -> SourceLocation:
        return SourceLocation(self.file, self.line, self.col, self.pos)

    def peek(self, k: int = 0) -> str:
        i = self.pos + k
        return self.src[i] if i < len(self.src) else ""

    def advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.src[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1


def tokenize(source: str, file: str = "<input>") -> list[Token]:
    """Split MiniC source into tokens, dropping whitespace and comments.

    The returned list always ends with a single EndOfFile token.
    """
    cur = _Cursor(source, file)
    tokens: list[Token] = []
    while cur.pos < len(source):
        ch = cur.peek()
        if ch in " \t\r\n\f\v":
            cur.advance()
            continue
        if ch == "/" and cur.peek(1) == "/":
            while cur.pos < len(source) and cur.peek() != "\n":
                cur.advance()
            continue
        if ch == "/" and cur.peek(1) == "*":
            start = cur.loc()
            cur.advance(2)
            while not (cur.peek() == "*" and cur.peek(1) == "/"):
                if cur.pos >= len(source):
                    raise LexicalError(start, "/*", "unterminated block comment")
                cur.advance()
            cur.advance(2)
            continue

        start = cur.loc()
        if ch.isascii() and (ch.isalpha() or ch == "_"):
            end = cur.pos
            while end < len(source) and source[end].isascii() and (source[end].isalnum() or source[end] == "_"):
                end += 1
            text = source[cur.pos:end]
            kind = TokenKind.KEYWORD if text in KEYWORDS else TokenKind.IDENTIFIER
            cur.advance(end - cur.pos)
            tokens.append(Token(kind, text, start))
            continue
        if ch.isascii() and ch.isdigit():
            end = cur.pos
            while end < len(source) and source[end].isascii() and source[end].isdigit():
                end += 1
            text = source[cur.pos:end]
            if int(text) > INT64_MAX:
                raise LexicalError(start, text, "integer literal does not fit in 64 bits")
            cur.advance(end - cur.pos)
            tokens.append(Token(TokenKind.INT_LITERAL, text, start))
            continue
        for p in PUNCTUATORS:
            if source.startswith(p, cur.pos):
                cur.advance(len(p))
                tokens.append(Token(TokenKind.PUNCTUATOR, p, start))
                break
        else:
            raise LexicalError(start, ch, f"unexpected character {ch!r}")

    tokens.append(Token(TokenKind.EOF, "", cur.loc()))
    return tokens

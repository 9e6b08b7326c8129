"""
Tokenizer shared by the schema, program, formula and spec readers.

Words are never reserved at this level: the parser decides from context
whether `select`, `table` or `forall` is a keyword, so attribute and table
names stay unrestricted.
"""

import re
from dataclasses import dataclass
from enum import Enum, auto
from typing import List

from app.errors import ParseError


class TokenType(Enum):
    IDENT = auto()
    NUMBER = auto()
    LPAREN = auto()
    RPAREN = auto()
    LBRACE = auto()
    RBRACE = auto()
    LBRACKET = auto()
    RBRACKET = auto()
    COMMA = auto()
    SEMICOLON = auto()
    COLON = auto()
    DEFINE = auto()
    DOT = auto()
    STAR = auto()
    EQ = auto()
    NEQ = auto()
    BANG = auto()
    AMP = auto()
    PIPE = auto()
    ARROW = auto()
    DARROW = auto()
    EOF = auto()


@dataclass(frozen=True)
class Token:
    type: TokenType
    value: str
    line: int
    col: int

    @property
    def word(self):
        """Lower-cased text, for case-insensitive keyword checks."""
        return self.value.lower()


# Longest operators first.
_SYMBOLS = [
    ('<->', TokenType.DARROW),
    ('->', TokenType.ARROW),
    (':=', TokenType.DEFINE),
    ('!=', TokenType.NEQ),
    ('<>', TokenType.NEQ),
    ('(', TokenType.LPAREN),
    (')', TokenType.RPAREN),
    ('{', TokenType.LBRACE),
    ('}', TokenType.RBRACE),
    ('[', TokenType.LBRACKET),
    (']', TokenType.RBRACKET),
    (',', TokenType.COMMA),
    (';', TokenType.SEMICOLON),
    (':', TokenType.COLON),
    ('.', TokenType.DOT),
    ('*', TokenType.STAR),
    ('=', TokenType.EQ),
    ('!', TokenType.BANG),
    ('&', TokenType.AMP),
    ('|', TokenType.PIPE),
]

_WORD = re.compile(r'[A-Za-z_][A-Za-z0-9_\-]*[A-Za-z0-9_]|[A-Za-z_]')
_NUMBER = re.compile(r'\d+')


class Tokenizer:
    """
    Converts source text into a list of tokens ending with EOF.

    `#` and `//` start comments running to the end of the line. Identifiers
    may contain inner hyphens (`confirm-corrected`, `delete-device`) but
    never end with one, so `x->y` still lexes as an arrow.
    """

    def __init__(self, text: str):
        self._text = text
        self._pos = 0
        self._line = 1
        self._col = 1

    def tokenize(self) -> List[Token]:
        tokens = []
        while True:
            self._skip_blanks()
            if self._pos >= len(self._text):
                tokens.append(Token(TokenType.EOF, '', self._line, self._col))
                return tokens
            tokens.append(self._next_token())

    def _skip_blanks(self):
        text = self._text
        while self._pos < len(text):
            ch = text[self._pos]
            if ch == '\n':
                self._advance(1)
            elif ch.isspace():
                self._advance(1)
            elif ch == '#' or text.startswith('//', self._pos):
                end = text.find('\n', self._pos)
                self._advance((len(text) if end < 0 else end) - self._pos)
            else:
                return

    def _advance(self, count):
        for ch in self._text[self._pos:self._pos + count]:
            if ch == '\n':
                self._line += 1
                self._col = 1
            else:
                self._col += 1
        self._pos += count

    def _emit(self, kind, length):
        token = Token(kind, self._text[self._pos:self._pos + length], self._line, self._col)
        self._advance(length)
        return token

    def _next_token(self):
        text = self._text
        match = _WORD.match(text, self._pos)
        if match:
            return self._emit(TokenType.IDENT, len(match.group(0)))
        match = _NUMBER.match(text, self._pos)
        if match:
            return self._emit(TokenType.NUMBER, len(match.group(0)))
        for symbol, kind in _SYMBOLS:
            if text.startswith(symbol, self._pos):
                return self._emit(kind, len(symbol))
        raise ParseError(f"Unexpected character {text[self._pos]!r}", self._line, self._col)


def tokenize(text):
    return Tokenizer(text).tokenize()

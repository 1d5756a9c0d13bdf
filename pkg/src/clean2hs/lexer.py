"""Tokenizer and layout pass for Clean source text."""

from __future__ import annotations

import enum
from dataclasses import dataclass

TAB_STOP = 4

KEYWORDS = frozenset({
    "module", "implementation", "definition", "system", "import", "from",
    "where", "in", "of", "case", "if", "let", "with", "class", "instance",
    "generic", "derive", "infixl", "infixr", "infix", "dynamic", "Start",
})

LAYOUT_KEYWORDS = frozenset({"where", "of", "let", "with"})

OPERATOR_CHARS = frozenset("~@#$%^?!+-*<>\\/|&=:.")
BRACKETS = frozenset("()[]{}")
OPENING = frozenset("([{")
CLOSING = frozenset(")]}")
PUNCT_SYMBOLS = frozenset({":", ","})


class TokenKind(enum.Enum):
    IDENT = "identifier"
    CONID = "constructor-identifier"
    INT = "integer-literal"
    REAL = "real-literal"
    CHAR = "char-literal"
    CHARLIST = "char-list-literal"
    STRING = "string-literal"
    KEYWORD = "keyword"
    OPERATOR = "operator"
    PUNCT = "punctuation"
    LAYOUT = "layout-marker"


@dataclass(frozen=True)
class SourcePos:
    line: int
    column: int
    byte_offset: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    start: SourcePos
    end: SourcePos
    # 'open' | 'sep' | 'close' for layout markers; their text is empty.
    layout: str | None = None

    @property
    def span(self) -> tuple[SourcePos, SourcePos]:
        return (self.start, self.end)

    def is_(self, text: str) -> bool:
        return self.text == text and self.kind is not TokenKind.LAYOUT \
            and self.kind not in (TokenKind.STRING, TokenKind.CHAR, TokenKind.CHARLIST)

    def __repr__(self) -> str:
        if self.kind is TokenKind.LAYOUT:
            return f"<{self.layout}@{self.start}>"
        return f"{self.kind.name}({self.text!r})@{self.start}"


class LexError(Exception):
    def __init__(self, reason: str, pos: SourcePos, message: str = ""):
        self.reason = reason
        self.pos = pos
        super().__init__(f"{pos}: {reason}" + (f": {message}" if message else ""))


class LayoutError(Exception):
    def __init__(self, reason: str, pos: SourcePos, message: str = ""):
        self.reason = reason
        self.pos = pos
        super().__init__(f"{pos}: {reason}" + (f": {message}" if message else ""))


def _is_ident_start(c: str) -> bool:
    return len(c) == 1 and c.isascii() and (c.isalpha() or c == "_")


def _is_ident_char(c: str) -> bool:
    return len(c) == 1 and c.isascii() and (c.isalnum() or c in "_`")


class _Scanner:
    def __init__(self, source: str):
        self.src = source
        self.i = 0
        self.line = 1
        self.col = 1
        self.byte = 0

    def pos(self) -> SourcePos:
        return SourcePos(self.line, self.col, self.byte)

    def peek(self, k: int = 0) -> str:
        j = self.i + k
        return self.src[j] if j < len(self.src) else ""

    def advance(self, n: int = 1) -> None:
        for _ in range(n):
            c = self.src[self.i]
            self.i += 1
            self.byte += len(c.encode("utf-8"))
            if c == "\n":
                self.line += 1
                self.col = 1
            elif c == "\t":
                self.col = ((self.col - 1) // TAB_STOP + 1) * TAB_STOP + 1
            else:
                self.col += 1

    def startswith(self, s: str) -> bool:
        return self.src.startswith(s, self.i)

    def skip_block_comment(self) -> None:
        start = self.pos()
        depth = 0
        while True:
            if self.i >= len(self.src):
                raise LexError("unterminated-comment", start, f"depth {depth} at end of input")
            if self.startswith("/*"):
                depth += 1
                self.advance(2)
            elif self.startswith("*/"):
                depth -= 1
                self.advance(2)
                if depth == 0:
                    return
            else:
                self.advance()

    def skip_quoted(self, quote: str) -> bool:
        """Advance over a quoted literal; returns False on a missing close."""
        self.advance()
        while self.i < len(self.src):
            c = self.src[self.i]
            if c == "\\":
                if self.i + 1 >= len(self.src) or self.src[self.i + 1] == "\n":
                    return False
                self.advance(2)
            elif c == quote:
                self.advance()
                return True
            elif c == "\n":
                return False
            else:
                self.advance()
        return False


def tokenize(source: str) -> list[Token]:
    """Split Clean source into tokens, discarding whitespace and comments."""
    sc = _Scanner(source)
    out: list[Token] = []

    def emit(kind: TokenKind, start: SourcePos, start_i: int) -> None:
        out.append(Token(kind, source[start_i:sc.i], start, sc.pos()))

    while sc.i < len(source):
        c = sc.peek()
        if c in " \t\r\n\f\v":
            sc.advance()
            continue
        if sc.startswith("//"):
            while sc.i < len(source) and sc.peek() != "\n":
                sc.advance()
            continue
        if sc.startswith("/*"):
            sc.skip_block_comment()
            continue

        start, si = sc.pos(), sc.i
        if c.isascii() and c.isdigit():
            _scan_number(sc)
            text = source[si:sc.i]
            kind = TokenKind.REAL if any(ch in text for ch in ".eE") and not text[:2].lower() == "0x" \
                else TokenKind.INT
            emit(kind, start, si)
        elif _is_ident_start(c):
            if c in "AE" and sc.peek(1) == "." and _is_ident_start(sc.peek(2)) \
                    and not sc.peek(2).isupper():
                sc.advance(2)
                emit(TokenKind.OPERATOR, start, si)
                continue
            while _is_ident_char(sc.peek()):
                sc.advance()
            text = source[si:sc.i]
            if text in KEYWORDS:
                kind = TokenKind.KEYWORD
            elif text[0].isupper():
                kind = TokenKind.CONID
            else:
                kind = TokenKind.IDENT
            emit(kind, start, si)
        elif c == '"':
            if not sc.skip_quoted('"'):
                raise LexError("unterminated-string", start)
            emit(TokenKind.STRING, start, si)
        elif c == "'":
            if not sc.skip_quoted("'"):
                raise LexError("unterminated-string", start, "character literal")
            emit(TokenKind.CHAR, start, si)
        elif c == "[" and sc.peek(1) == "'" and _charlist_end(source, sc.i + 1) is not None:
            sc.advance(_charlist_end(source, sc.i + 1) - sc.i)
            emit(TokenKind.CHARLIST, start, si)
        elif c in BRACKETS or c in ",;":
            sc.advance()
            emit(TokenKind.PUNCT, start, si)
        elif c == "?" and (source.startswith("?None", sc.i) or source.startswith("?Just", sc.i)) \
                and not _is_ident_char(sc.peek(5)):
            sc.advance(5)
            emit(TokenKind.CONID, start, si)
        elif c in OPERATOR_CHARS:
            while sc.peek() and sc.peek() in OPERATOR_CHARS \
                    and not sc.startswith("//") and not sc.startswith("/*"):
                sc.advance()
            text = source[si:sc.i]
            emit(TokenKind.PUNCT if text in PUNCT_SYMBOLS else TokenKind.OPERATOR, start, si)
        else:
            raise LexError("invalid-char", start, repr(c))
    return out


def _scan_number(sc: _Scanner) -> None:
    if sc.startswith("0x") or sc.startswith("0X"):
        sc.advance(2)
        while sc.peek() and sc.peek() in "0123456789abcdefABCDEF":
            sc.advance()
        return
    while sc.peek().isascii() and sc.peek().isdigit():
        sc.advance()
    if sc.peek() == "." and sc.peek(1).isascii() and sc.peek(1).isdigit():
        sc.advance()
        while sc.peek().isascii() and sc.peek().isdigit():
            sc.advance()
    if sc.peek() in ("e", "E"):
        k = 1
        if sc.peek(1) in ("+", "-"):
            k = 2
        if sc.peek(k).isascii() and sc.peek(k).isdigit():
            sc.advance(k)
            while sc.peek().isascii() and sc.peek().isdigit():
                sc.advance()


def _charlist_end(source: str, i: int) -> int | None:
    """Index just past `']` for a `['...']` literal whose quote starts at i."""
    j = i + 1
    while j < len(source):
        c = source[j]
        if c == "\\":
            j += 2
            continue
        if c == "\n":
            return None
        if c == "'":
            return j + 2 if source.startswith("]", j + 1) else None
        j += 1
    return None


@dataclass
class _Context:
    column: int
    opener: str
    depth: int


def _marker(kind: str, at: SourcePos) -> Token:
    return Token(TokenKind.LAYOUT, "", at, at, kind)


def layout_insert(tokens: list[Token]) -> list[Token]:
    """Insert block open/separator/close markers using the offside rule.

    The whole file is one top-level block. `where`, `of`, `let` and `with`
    open a nested block at the column of the following token. Lines indented
    deeper than the current block continue the previous item, which is how
    guard and `#` lines stay attached to their definition head.
    """
    out: list[Token] = []
    stack: list[_Context] = []
    depth = 0
    pending: str | None = "top"
    last_line = 0

    for tok in tokens:
        fresh_block = False
        if pending is not None:
            col = tok.start.column
            enclosing = stack[-1].column if stack else 0
            if col > enclosing:
                stack.append(_Context(col, pending, depth))
                out.append(_marker("open", tok.start))
                fresh_block = True
            else:
                out.append(_marker("open", tok.start))
                out.append(_marker("close", tok.start))
            pending = None

        if not fresh_block and tok.start.line > last_line:
            col = tok.start.column
            while stack and col < stack[-1].column:
                if len(stack) == 1:
                    raise LayoutError("inconsistent-indentation", tok.start,
                                      f"column {col} is left of the top-level column {stack[0].column}")
                out.append(_marker("close", tok.start))
                stack.pop()
            if stack and col == stack[-1].column:
                out.append(_marker("sep", tok.start))

        if tok.kind is TokenKind.KEYWORD and tok.text == "in":
            if any(ctx.opener == "let" and ctx.depth == depth for ctx in stack[1:]):
                while stack[-1].opener != "let":
                    out.append(_marker("close", tok.start))
                    stack.pop()
                out.append(_marker("close", tok.start))
                stack.pop()
        elif tok.kind is TokenKind.PUNCT and tok.text in CLOSING:
            while len(stack) > 1 and stack[-1].depth >= depth:
                out.append(_marker("close", tok.start))
                stack.pop()
        elif tok.kind is TokenKind.PUNCT and tok.text == "," and depth > 0:
            while len(stack) > 1 and stack[-1].depth == depth:
                out.append(_marker("close", tok.start))
                stack.pop()

        out.append(tok)
        last_line = tok.end.line

        if tok.kind is TokenKind.PUNCT:
            if tok.text in OPENING:
                depth += 1
            elif tok.text in CLOSING:
                depth = max(0, depth - 1)
        if tok.kind is TokenKind.KEYWORD and tok.text in LAYOUT_KEYWORDS:
            pending = tok.text

    end = tokens[-1].end if tokens else SourcePos(1, 1, 0)
    if pending is not None:
        out.append(_marker("open", end))
        out.append(_marker("close", end))
    while stack:
        out.append(_marker("close", end))
        stack.pop()
    return out

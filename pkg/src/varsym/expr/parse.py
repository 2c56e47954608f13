"""Pratt parser for the expression grammar.

Grammar summary: identifiers ``[a-zA-Z][a-zA-Z0-9_]*``, integer or decimal
literals, ``+ - * / ^`` with the usual precedence (``^`` binds tightest and
is right-associative), functions ``ln exp sin cos sqrt``.  Derivative marks
are postfix primes (``x'``, ``x''``) or ``x^(k)`` where ``k`` is an integer
literal written directly after an identifier; any other exponent is a power.
Discrete shifts are written ``x[k]``, ``x[k+1]``.  Implicit multiplication
is rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from varsym.errors import ParseError, UnknownFunctionError
from varsym.expr.core import Expr, add, func, mul, num, power, sym

KNOWN_FUNCTIONS = ("ln", "exp", "sin", "cos", "sqrt")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()\[\],'])
    """,
    re.VERBOSE,
)

_BINDING = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_PREFIX = 30


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "op", "end"
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok: Token):
        raise ParseError(message, tok.pos, self.text)

    def expect(self, text: str) -> Token:
        tok = self.advance()
        if tok.text != text or tok.kind != "op":
            self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok)
        return tok

    def parse(self) -> Expr:
        if self.peek().kind == "end":
            self.error("empty expression", self.peek())
        e = self.expression(0)
        tok = self.peek()
        if tok.kind != "end":
            self.error(f"unexpected {tok.text!r}", tok)
        return e

    def lbp(self, tok: Token) -> int:
        if tok.kind == "op":
            return _BINDING.get(tok.text, 0)
        return 0

    def expression(self, rbp: int) -> Expr:
        left = self.nud(self.advance())
        while rbp < self.lbp(self.peek()):
            left = self.led(self.advance(), left)
        return left

    def nud(self, tok: Token) -> Expr:
        if tok.kind == "num":
            return num(Fraction(tok.text))
        if tok.kind == "ident":
            return self.identifier(tok)
        if tok.kind == "op":
            if tok.text == "-":
                return -self.expression(_PREFIX)
            if tok.text == "+":
                return self.expression(_PREFIX)
            if tok.text == "(":
                e = self.expression(0)
                self.expect(")")
                return e
        if tok.kind == "end":
            self.error("unexpected end of input", tok)
        self.error(f"unexpected {tok.text!r}", tok)

    def led(self, tok: Token, left: Expr) -> Expr:
        op = tok.text
        if op == "^":
            right = self.expression(_BINDING["^"] - 1)
            return power(left, right)
        right = self.expression(_BINDING[op])
        if op == "+":
            return add(left, right)
        if op == "-":
            return add(left, -right)
        if op == "*":
            return mul(left, right)
        if op == "/":
            return mul(left, power(right, -1))
        self.error(f"unexpected {op!r}", tok)

    def identifier(self, tok: Token) -> Expr:
        name = tok.text
        nxt = self.peek()
        if nxt.kind == "op" and nxt.text == "(":
            if name not in KNOWN_FUNCTIONS:
                raise UnknownFunctionError(f"unknown function {name!r}", tok.pos, self.text)
            self.advance()
            arg = self.expression(0)
            self.expect(")")
            return func(name, arg)
        if nxt.kind == "op" and nxt.text == "[":
            return self.shifted(name)
        order = 0
        while self.peek().kind == "op" and self.peek().text == "'":
            self.advance()
            order += 1
        if order == 0 and self._derivative_mark():
            self.advance()
            self.advance()
            order = int(self.advance().text)
            self.advance()
        return sym(name, order)

    def _derivative_mark(self) -> bool:
        a, b, c, d = (self.peek(j) for j in range(4))
        return (
            a.text == "^"
            and b.text == "("
            and c.kind == "num"
            and c.text.isdigit()
            and d.text == ")"
        )

    def shifted(self, name: str) -> Expr:
        self.expect("[")
        idx = self.advance()
        if idx.kind != "ident" or idx.text != "k":
            self.error("discrete index must be written k, k+j or k-j", idx)
        shift = 0
        tok = self.peek()
        if tok.kind == "op" and tok.text in "+-":
            self.advance()
            amount = self.advance()
            if amount.kind != "num" or not amount.text.isdigit():
                self.error("integer shift expected", amount)
            shift = int(amount.text) * (1 if tok.text == "+" else -1)
        self.expect("]")
        return sym(name, 0, shift)


def parse(text: str) -> Expr:
    """Parse ``text`` into a canonical expression."""
    return _Parser(text).parse()

"""Recursive-descent parser for polynomial expressions.

Grammar (whitespace-insensitive)::

    expr   := term (('+'|'-') term)*
    term   := unary ('*' unary)*
    unary  := ('+'|'-') unary | power
    power  := atom ('^' INT)?
    atom   := NUMBER | IDENT | '(' expr ')'
    NUMBER := INT ('/' INT)?

Identifiers must be ring variables; the literal ``i`` denotes the imaginary
unit and is accepted only for Gaussian-rational rings.  Errors carry the
character position at which parsing failed.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .poly import Polynomial, PolynomialRing
from .scalars import I_UNIT


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_TOKEN = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*^()/]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad_at = len(text) - len(stripped)
            raise ParseError(f"unexpected character {text[bad_at]!r}", bad_at)
        if m.lastgroup == "int":
            tokens.append(("int", m.group("int"), m.start("int")))
        elif m.lastgroup == "ident":
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, ring: PolynomialRing):
        self.text = text
        self.ring = ring
        self.tokens = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def advance(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect_op(self, op: str):
        kind, value, pos = self.peek()
        if kind != "op" or value != op:
            raise ParseError(f"expected {op!r}", pos)
        return self.advance()

    def parse(self) -> Polynomial:
        p = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {value!r}", pos)
        return p

    def expr(self) -> Polynomial:
        p = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                q = self.term()
                p = p + q if value == "+" else p - q
            else:
                return p

    def term(self) -> Polynomial:
        p = self.unary()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value == "*":
                self.advance()
                p = p * self.unary()
            else:
                return p

    def unary(self) -> Polynomial:
        kind, value, _ = self.peek()
        if kind == "op" and value in "+-":
            self.advance()
            p = self.unary()
            return p if value == "+" else -p
        return self.power()

    def power(self) -> Polynomial:
        p = self.atom()
        kind, value, pos = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            kind2, value2, pos2 = self.peek()
            if kind2 != "int":
                raise ParseError("exponent must be a nonnegative integer", pos2)
            self.advance()
            return p ** int(value2)
        return p

    def atom(self) -> Polynomial:
        kind, value, pos = self.advance()
        if kind == "int":
            numerator = int(value)
            kind2, value2, _ = self.peek()
            if kind2 == "op" and value2 == "/":
                self.advance()
                kind3, value3, pos3 = self.peek()
                if kind3 != "int":
                    raise ParseError("expected integer denominator", pos3)
                self.advance()
                if int(value3) == 0:
                    raise ParseError("zero denominator", pos3)
                return self.ring.constant(Fraction(numerator, int(value3)))
            return self.ring.constant(numerator)
        if kind == "ident":
            if value in self.ring.variables:
                return self.ring.variable(self.ring.index_of(value))
            if value == "i":
                if self.ring.gaussian:
                    return self.ring.constant(I_UNIT)
                raise ParseError(
                    "imaginary unit 'i' requires a Gaussian-rational ring", pos
                )
            raise ParseError(f"unknown identifier {value!r}", pos)
        if kind == "op" and value == "(":
            p = self.expr()
            self.expect_op(")")
            return p
        raise ParseError(f"unexpected token {value!r}" if value else "unexpected end of input", pos)


def parse_polynomial(text: str, ring: PolynomialRing) -> Polynomial:
    """Parse ``text`` into a canonical Polynomial over ``ring``."""
    return _Parser(text, ring).parse()

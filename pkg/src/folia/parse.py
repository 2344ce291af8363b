"""Recursive-descent parser for polynomial and rational-log text.

Grammar::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := ('+' | '-') unary | power
    power := atom ('^' ['-'] INT | '^' '(' ['-'] INT ')')?
    atom  := NUMBER | NAME | 'ln' '(' expr ')' | '(' expr ')'
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Sequence

from .polycore import Poly, RatLogExpr


class ParseError(ValueError):
    def __init__(self, message: str, column: int = 0, line: int = 0):
        self.message = message
        self.column = column
        self.line = line
        where = f"line {line}, column {column}" if line else f"column {column}"
        super().__init__(f"{where}: {message}")

    def at_line(self, line: int, offset: int = 0) -> "ParseError":
        return ParseError(self.message, self.column + offset, line)


_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d+)?)|([A-Za-z_][A-Za-z0-9_]*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str) -> list:
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[col - 1]!r}", col)
        num, name, op = m.groups()
        start = m.start(m.lastindex) + 1
        if num is not None:
            toks.append(("num", Fraction(num), start))
        elif name is not None:
            toks.append(("name", name, start))
        else:
            toks.append(("op", "^" if op == "**" else op, start))
        pos = m.end()
    toks.append(("end", None, len(text) + 1))
    return toks


class _Parser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.toks = _tokenize(text)
        self.i = 0
        self.variables = tuple(variables)

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, op: str):
        t = self.take()
        if t[0] != "op" or t[1] != op:
            raise ParseError(f"expected {op!r}", t[2])
        return t

    def parse(self) -> RatLogExpr:
        if self.peek()[0] == "end":
            raise ParseError("empty expression", 1)
        e = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ParseError(f"unexpected token {t[1]!r}", t[2])
        return e

    def expr(self):
        e = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            r = self.term()
            e = e + r if op == "+" else e - r
        return e

    def term(self):
        e = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            _, op, col = self.take()
            r = self.unary()
            try:
                e = e * r if op == "*" else e / r
            except (ValueError, ZeroDivisionError) as exc:
                raise ParseError(str(exc), col) from None
        return e

    def unary(self):
        t = self.peek()
        if t[0] == "op" and t[1] in "+-":
            self.take()
            e = self.unary()
            return -e if t[1] == "-" else e
        return self.power()

    def power(self):
        base = self.atom()
        t = self.peek()
        if t[0] == "op" and t[1] == "^":
            self.take()
            paren = self.peek()[0] == "op" and self.peek()[1] == "("
            if paren:
                self.take()
            neg = False
            if self.peek()[0] == "op" and self.peek()[1] == "-":
                self.take()
                neg = True
            n = self.take()
            if n[0] != "num" or n[1].denominator != 1:
                raise ParseError("exponent must be an integer", n[2])
            if paren:
                self.expect(")")
            k = -int(n[1]) if neg else int(n[1])
            try:
                return base ** k
            except (ValueError, ZeroDivisionError) as exc:
                raise ParseError(str(exc), t[2]) from None
        return base

    def atom(self):
        t = self.take()
        kind, val, col = t
        if kind == "num":
            return RatLogExpr.const(self.variables, val)
        if kind == "name":
            if val == "ln":
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                if arg.logs:
                    raise ParseError("nested logarithms are not supported", col)
                if arg.num.is_zero():
                    raise ParseError("logarithm of zero", col)
                return RatLogExpr(Poly(self.variables), None, [(1, arg.num), (-1, arg.den)])
            if val not in self.variables:
                raise ParseError(f"unknown name {val!r}", col)
            return RatLogExpr(Poly.var(self.variables, val))
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "end":
            raise ParseError("unexpected end of expression", col)
        raise ParseError(f"unexpected token {val!r}", col)


def parse_expr(text: str, variables: Sequence[str]) -> RatLogExpr:
    """Parse a rational-log expression over ``variables``."""
    return _Parser(text, variables).parse()


def parse_poly(text: str, variables: Sequence[str]) -> Poly:
    """Parse text that must denote a polynomial."""
    e = parse_expr(text, variables)
    if not e.is_poly():
        raise ParseError(f"not a polynomial: {text.strip()!r}", 1)
    return e.as_poly()

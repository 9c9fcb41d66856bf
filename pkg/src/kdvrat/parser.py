"""Recursive-descent parser for the CLI expression language.

Grammar (whitespace-insensitive):

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := ('+' | '-') factor | power
    power   := atom ('^' integer)?
    atom    := integer | name | '(' expr ')'

Names come from the public variable alphabet (x, t, lambda, E, mu, nu,
tau_j, taup_j, taum_j, c_j, E0, mu0, nu0).  Every value is an exact rational
function; '/' is exact division, '^' takes integer (possibly negative)
exponents.  Parse errors carry the character position.
"""

from __future__ import annotations

import re

from .errors import DivisionByZero, ParseError, UnknownVariable
from .ring import Poly, RatFun, is_public_var

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9_]*)|([()+\-*/^]))")


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.items: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                if text[pos:].strip():
                    bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
                    raise ParseError(f"unexpected character {text[bad]!r}", bad)
                break
            if m.group(1) is not None:
                self.items.append(("int", m.group(1), m.start(1)))
            elif m.group(2) is not None:
                self.items.append(("name", m.group(2), m.start(2)))
            else:
                self.items.append(("op", m.group(3), m.start(3)))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.items[self.i] if self.i < len(self.items) else (None, None, len(self.text))

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok


def parse_expr(text: str) -> RatFun:
    """Parse the expression language into an exact rational function."""
    toks = _Tokens(text)
    value = _expr(toks)
    kind, lexeme, pos = toks.peek()
    if kind is not None:
        raise ParseError(f"trailing input {lexeme!r}", pos)
    return value


def _expr(toks: _Tokens) -> RatFun:
    value = _term(toks)
    while True:
        kind, lexeme, _ = toks.peek()
        if kind == "op" and lexeme in "+-":
            toks.next()
            rhs = _term(toks)
            value = value + rhs if lexeme == "+" else value - rhs
        else:
            return value


def _term(toks: _Tokens) -> RatFun:
    value = _factor(toks)
    while True:
        kind, lexeme, pos = toks.peek()
        if kind == "op" and lexeme in "*/":
            toks.next()
            rhs = _factor(toks)
            if lexeme == "*":
                value = value * rhs
            else:
                if rhs.is_zero:
                    raise DivisionByZero(f"division by zero at position {pos}")
                value = value / rhs
        else:
            return value


def _factor(toks: _Tokens) -> RatFun:
    kind, lexeme, _ = toks.peek()
    if kind == "op" and lexeme in "+-":
        toks.next()
        value = _factor(toks)
        return value if lexeme == "+" else -value
    return _power(toks)


def _power(toks: _Tokens) -> RatFun:
    base = _atom(toks)
    kind, lexeme, _ = toks.peek()
    if kind == "op" and lexeme == "^":
        toks.next()
        exp = _integer(toks)
        if exp < 0 and base.is_zero:
            raise DivisionByZero("zero to a negative power")
        return base ** exp
    return base


def _integer(toks: _Tokens) -> int:
    sign = 1
    kind, lexeme, pos = toks.peek()
    if kind == "op" and lexeme in "+-":
        toks.next()
        sign = -1 if lexeme == "-" else 1
        kind, lexeme, pos = toks.peek()
    if kind != "int":
        raise ParseError("expected an integer exponent", pos)
    toks.next()
    return sign * int(lexeme)


def _atom(toks: _Tokens) -> RatFun:
    kind, lexeme, pos = toks.next()
    if kind == "int":
        return RatFun.const(int(lexeme))
    if kind == "name":
        if not is_public_var(lexeme):
            raise UnknownVariable(f"unknown variable {lexeme!r}", pos)
        return RatFun.var(lexeme)
    if kind == "op" and lexeme == "(":
        value = _expr(toks)
        kind, lexeme, pos = toks.next()
        if lexeme != ")":
            raise ParseError("expected ')'", pos)
        return value
    raise ParseError(f"unexpected token {lexeme!r}" if kind else "unexpected end of input", pos)

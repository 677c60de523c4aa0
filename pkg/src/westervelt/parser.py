"""Text form of jet expressions.

Grammar (precedence climbing, ``^`` binds tightest and is right associative)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('+' | '-') unary | power
    power   := primary ('^' unary)?
    primary := NUMBER | NAME | FNAME "'"* '(' expr ')' | '(' expr ')'

Names are parameters, ``t``, ``x`` and jet coordinates such as ``p_tx``.
Exponents must reduce to rational constants.  Decimal and scientific
literals are read exactly (``0.1`` is 1/10).
"""

from __future__ import annotations

import re
from fractions import Fraction

from gmpy2 import mpq

from .kernel import (
    DEPVARS,
    FUNCS,
    INDEPS,
    PARAMS,
    ExprError,
    JetExpr,
    coord_from_name,
    expr_pow,
    func,
    indep,
    param,
)


class ParseError(ExprError):
    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(f"{message} at position {position}" + (f" in {text!r}" if text else ""))
        self.position = position


class UnknownIdentifierError(ParseError):
    pass


_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()'])"
    r")"
)


def _tokenize(text: str):
    pos = 0
    out = []
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", n))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value:
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", pos, self.text)

    def parse(self) -> JetExpr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", pos, self.text)
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, _ = self.take()
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self):
        e = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            _, op, pos = self.take()
            rhs = self.unary()
            if op == "*":
                e = e * rhs
            else:
                try:
                    e = e / rhs
                except ExprError as exc:
                    raise ParseError(str(exc), pos, self.text) from None
        return e

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val in ("+", "-"):
            self.take()
            inner = self.unary()
            return -inner if val == "-" else inner
        return self.power()

    def power(self):
        base = self.primary()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.take()
            exp = self.unary()
            r = exp.rational_value()
            if r is None:
                raise ParseError("exponent must be a rational constant", pos, self.text)
            try:
                return expr_pow(base, r)
            except ExprError as exc:
                raise ParseError(str(exc), pos, self.text) from None
        return base

    def primary(self):
        kind, val, pos = self.take()
        if kind == "num":
            return JetExpr.const(mpq(Fraction(val)))
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "name":
            return self.name(val, pos)
        raise ParseError(f"unexpected token {val or 'end of input'!r}", pos, self.text)

    def name(self, val, pos):
        if val in FUNCS:
            order = 0
            while self.peek()[1] == "'":
                self.take()
                order += 1
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return func(val, order, arg)
        if val in PARAMS:
            return param(val)
        if val in INDEPS:
            return indep(val)
        head = val.split("_", 1)[0]
        if head in DEPVARS:
            try:
                return coord_from_name(val).expr()
            except ExprError as exc:
                raise ParseError(str(exc), pos, self.text) from None
        raise UnknownIdentifierError(f"unknown identifier {val!r}", pos, self.text)


def parse(text: str) -> JetExpr:
    """Parse ``text`` into a canonical :class:`JetExpr`."""
    return _Parser(text).parse()

"""Recursive-descent parser for bivariate polynomial expressions.

Grammar (whitespace insensitive)::

    poly  := term (('+' | '-') term)*
    term  := [coef] ['*'] factor*        a leading sign is allowed
    factor:= var ['^' nat] | '(' poly ')' ['^' nat]
    coef  := int ['/' posint]
    var   := 'x' | 'y'

Parenthesized groups and products of them extend the minimal grammar so
that inputs such as ``(y^2+x^3)*(y-x)`` can be written directly.
"""

from __future__ import annotations

from fractions import Fraction

from .algebra import BivariatePoly, bi_to_str


class ParseError(ValueError):
    """Syntax error with the byte offset where it was detected."""

    def __init__(self, position, expected, text=""):
        self.position = position
        self.expected = expected
        super().__init__(f"at offset {position}: expected {expected}"
                         + (f" in {text!r}" if text else ""))


_MINUS = ("-", "−")


class _Parser:
    def __init__(self, text, names=("x", "y")):
        self.text = text
        self.pos = 0
        self.names = names

    def peek(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch):
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def fail(self, expected):
        raise ParseError(len(self.text[:self.pos].encode()), expected, self.text)

    def number(self):
        self.peek()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.fail("integer")
        return int(self.text[start:self.pos])

    def poly(self):
        sign = 1
        if self.peek() in _MINUS:
            self.pos += 1
            sign = -1
        elif self.peek() == "+":
            self.pos += 1
        out = self.term() * sign
        while True:
            ch = self.peek()
            if ch == "+":
                self.pos += 1
                out = out + self.term()
            elif ch in _MINUS:
                self.pos += 1
                out = out - self.term()
            else:
                return out

    def term(self):
        coef = Fraction(1)
        got = False
        if self.peek().isdigit():
            num = self.number()
            if self.take("/"):
                den = self.number()
                if den == 0:
                    self.fail("positive denominator")
                coef = Fraction(num, den)
            else:
                coef = Fraction(num)
            got = True
        out = BivariatePoly.const(coef, self.names)
        while True:
            ch = self.peek()
            if ch == "*":
                if not got:
                    self.fail("term before '*'")
                self.pos += 1
                ch = self.peek()
                if not (ch in self.names or ch == "(" or ch.isdigit()):
                    self.fail("variable or '('")
            if ch in self.names:
                self.pos += 1
                k = self.names.index(ch)
                e = self.exponent()
                out = out * BivariatePoly({(e, 0) if k == 0 else (0, e):
                                           Fraction(1)}, self.names)
                got = True
            elif ch == "(":
                self.pos += 1
                inner = self.poly()
                if not self.take(")"):
                    self.fail("')'")
                out = out * inner ** self.exponent()
                got = True
            elif ch.isdigit() and got:
                num = self.number()
                out = out * Fraction(num)
            else:
                break
        if not got:
            self.fail("term")
        return out

    def exponent(self):
        if self.take("^"):
            return self.number()
        return 1


def parse_poly(text, names=("x", "y")):
    """Parse ``text`` into an exact rational :class:`BivariatePoly`.

    Raises
    ------
    ParseError
        With the byte offset of the first unexpected character.
    """
    p = _Parser(text, names)
    out = p.poly()
    if p.peek():
        p.fail("end of input")
    return out


def to_text(f):
    """Canonical printed form; ``parse_poly(to_text(f)) == f``."""
    return bi_to_str(f)

"""Text grammar for exact polynomial input.

A polynomial is a sum of terms separated by ``+`` or ``-``.  A term is a
``*``-separated product of factors, each one of

* an integer or a fraction ``a/b``,
* ``pi`` or ``pi^j`` (the uniformizer),
* ``u`` or ``u^i`` (the residue generator),
* the variable, optionally raised to a power (``X^5``).

Whitespace is ignored.  Anything else raises :class:`ParseError` carrying
the character offset of the offending token.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import ParseError

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*^]))")

VARIABLES = ("X", "Y", "X0")


def _tokens(text):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, var_names, allow_pi, allow_u):
        self.toks = _tokens(text)
        self.i = 0
        self.var_names = var_names
        self.allow_pi = allow_pi
        self.allow_u = allow_u

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, tok, what):
        raise ParseError(what, tok[2])

    def exponent(self):
        if self.peek()[1] != "^":
            return 1
        self.take()
        tok = self.take()
        if tok[0] != "num" or "/" in tok[1]:
            self.fail(tok, "expected a nonnegative integer exponent")
        return int(tok[1])

    def term(self, sign):
        coeff = Fraction(sign)
        pi_exp = u_exp = x_exp = 0
        while True:
            tok = self.take()
            if tok[0] == "num":
                coeff *= Fraction(tok[1])
                if self.peek()[1] == "^":
                    coeff = coeff ** self.exponent()
            elif tok[0] == "name" and tok[1] == "pi" and self.allow_pi:
                pi_exp += self.exponent()
            elif tok[0] == "name" and tok[1] == "u" and self.allow_u:
                u_exp += self.exponent()
            elif tok[0] == "name" and tok[1] in self.var_names:
                x_exp += self.exponent()
            else:
                self.fail(tok, f"unknown symbol {tok[1]!r}")
            if self.peek()[1] == "*":
                self.take()
                continue
            return x_exp, (coeff, pi_exp, u_exp)

    def parse(self):
        terms = []
        sign = 1
        tok = self.peek()
        if tok[1] in "+-" and tok[0] == "op":
            self.take()
            sign = -1 if tok[1] == "-" else 1
        if self.peek()[0] == "end":
            self.fail(self.peek(), "empty polynomial")
        while True:
            terms.append(self.term(sign))
            tok = self.take()
            if tok[0] == "end":
                return terms
            if tok[1] not in "+-" or tok[0] != "op":
                self.fail(tok, f"unexpected token {tok[1]!r}")
            sign = -1 if tok[1] == "-" else 1


def parse_terms(text: str, var_names=VARIABLES, *, allow_pi=True, allow_u=True):
    """List of ``(x_exponent, (rational, pi_exponent, u_exponent))`` terms."""
    return _Parser(text, tuple(var_names), allow_pi, allow_u).parse()


def parse_int_poly(text: str, var: str = "u"):
    """Integer coefficient list (ascending) of a polynomial in one variable."""
    coeffs = {}
    for x_exp, (c, _, _) in parse_terms(text, (var,), allow_pi=False, allow_u=False):
        if c.denominator != 1:
            raise ParseError(f"non-integer coefficient {c}", 0)
        coeffs[x_exp] = coeffs.get(x_exp, 0) + int(c)
    deg = max(coeffs, default=0)
    return [coeffs.get(i, 0) for i in range(deg + 1)]


def parse_poly(text: str, desc, var: str = "X"):
    """Parse ``text`` into a :class:`~stablered.polyalg.Poly` over ``desc``."""
    from .polyalg import Poly

    coeffs = {}
    pi = desc.pi()
    u = desc.u()
    for x_exp, (c, pi_exp, u_exp) in parse_terms(text):
        value = desc(c) * (pi ** pi_exp) * (u ** u_exp)
        coeffs[x_exp] = coeffs[x_exp] + value if x_exp in coeffs else value
    deg = max(coeffs, default=0)
    return Poly(desc, [coeffs.get(i, desc.zero()) for i in range(deg + 1)], var)

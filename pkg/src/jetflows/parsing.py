"""Reader for the expression grammar, plus a LaTeX writer/reader pair.

Grammar (whitespace-insensitive)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' exponent)?
    exponent := ['-'] INT | '(' ['-'] INT ')'
    atom   := INT | NAME | '(' expr ')'

``a`` and ``ab`` are the separant root and its base derivative, ``u`` and
``uN`` are jet variables, any other name is a constant.  Division is only
allowed by a monomial free of jet variables.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .ring import (
    AB, A, Coeff, Const, DiffPoly, Jet, ONE, invert_monomial, key_exponents,
)


class ParseError(ValueError):
    def __init__(self, msg: str, pos: int, text: str = ""):
        self.pos = pos
        self.text = text
        caret = f"\n  {text}\n  {' ' * pos}^" if text else ""
        super().__init__(f"{msg} at position {pos}{caret}")


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


def _tokenize(text: str) -> list:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group(1) is not None:
            toks.append(("int", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            toks.append(("name", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ParseError(f"unexpected character {ch!r}", m.start(3), text)
            toks.append(("op", ch, m.start(3)))
        pos = m.end()
    toks.append(("end", "", n))
    return toks


_JET_NAME = re.compile(r"u(\d*)$")


def symbol_for(name: str):
    if name == "a":
        return A
    if name == "ab":
        return AB
    m = _JET_NAME.match(name)
    if m:
        return Jet(int(m.group(1)) if m.group(1) else 0)
    return Const(name)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value):
        t = self.take()
        if t[1] != value:
            raise ParseError(f"expected {value!r}, found {t[1] or 'end of input'!r}", t[2], self.text)
        return t

    def parse(self) -> DiffPoly:
        e = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ParseError(f"unexpected {t[1]!r}", t[2], self.text)
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
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
                if len(rhs) != 1:
                    raise ParseError("can only divide by a single monomial", pos, self.text)
                try:
                    e = e * invert_monomial(rhs)
                except ValueError as exc:
                    raise ParseError(str(exc), pos, self.text) from None
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
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            _, _, pos = self.take()
            n = self.exponent()
            if n < 0 and len(base) != 1:
                raise ParseError("negative powers need a monomial base", pos, self.text)
            try:
                return base ** n
            except ValueError as exc:
                raise ParseError(str(exc), pos, self.text) from None
        return base

    def exponent(self) -> int:
        paren = False
        if self.peek()[1] == "(":
            self.take()
            paren = True
        sign = 1
        if self.peek()[1] == "-":
            self.take()
            sign = -1
        t = self.take()
        if t[0] != "int":
            raise ParseError("expected an integer exponent", t[2], self.text)
        if paren:
            self.expect(")")
        return sign * int(t[1])

    def atom(self):
        t = self.take()
        kind, val, pos = t
        if kind == "int":
            return DiffPoly.constant(int(val))
        if kind == "name":
            return DiffPoly.symbol(symbol_for(val))
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos, self.text)


def parse(text: str) -> DiffPoly:
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# LaTeX
# ---------------------------------------------------------------------------

def _latex_sym(sym, base: int) -> str:
    if isinstance(sym, Jet):
        return "u" if sym.order == 0 else f"u_{{{sym.order}}}"
    if isinstance(sym, Coeff):
        return "a" if sym.depth == 0 else f"a_{{{base}}}"
    return sym.name


def _latex_order(sym):
    if isinstance(sym, Const):
        return (0, sym.name)
    if isinstance(sym, Coeff):
        return (1, sym.depth)
    return (2, -sym.order)


def to_latex(e: DiffPoly, base: int) -> str:
    """Render with ``a_{b}`` spelled out at the given base level."""
    if e.is_zero():
        return "0"
    out = []
    for i, k in enumerate(e.sorted_keys()):
        c = e.data[k]
        exps = key_exponents(k)
        factors = []
        for sym in sorted(exps, key=_latex_order):
            x = exps[sym]
            s = _latex_sym(sym, base)
            factors.append(s if x == 1 else f"{s}^{{{x}}}")
        mag = abs(c)
        if mag.denominator != 1:
            num = rf"\frac{{{mag.numerator}}}{{{mag.denominator}}}"
        elif mag != 1 or not factors:
            num = str(mag.numerator)
        else:
            num = ""
        body = " ".join(([num] if num else []) + factors)
        if i == 0:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)


_LATEX_TOKEN = re.compile(
    r"\s*(?:\\frac\{(\d+)\}\{(\d+)\}|(\d+)|u_\{(\d+)\}|a_\{(\d+)\}|([A-Za-z][A-Za-z0-9]*)|\^\{(-?\d+)\}|([+-]))"
)


def from_latex(text: str, base: int) -> DiffPoly:
    """Inverse of :func:`to_latex` for the subset it emits."""
    pos = 0
    total = DiffPoly()
    sign = 1
    coeff = Fraction(1)
    term = ONE
    last = None
    started = False

    def flush():
        nonlocal total, term, coeff, started
        if started:
            total = total + term.scale(sign * coeff)
        term, coeff, started = ONE, Fraction(1), False

    text = text.strip()
    while pos < len(text):
        m = _LATEX_TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError("unrecognized LaTeX", pos, text)
        frac_n, frac_d, integer, ujet, abase, name, exp, op = m.groups()
        if op is not None:
            flush()
            sign = -1 if op == "-" else 1
            last = None
        elif frac_n is not None:
            coeff = Fraction(int(frac_n), int(frac_d))
            started = True
        elif integer is not None:
            coeff = Fraction(int(integer))
            started = True
        elif exp is not None:
            if last is None:
                raise ParseError("exponent without a base", m.start(), text)
            # the base was already multiplied in once
            term = term * DiffPoly.symbol(last, int(exp) - 1)
            last = None
        else:
            if ujet is not None:
                sym = Jet(int(ujet))
            elif abase is not None:
                if int(abase) != base:
                    raise ParseError(f"a_{{{abase}}} does not match base {base}", m.start(), text)
                sym = AB
            elif name == "u":
                sym = Jet(0)
            elif name == "a":
                sym = A
            else:
                sym = Const(name)
            term = term * DiffPoly.symbol(sym)
            last = sym
            started = True
        pos = m.end()
    flush()
    return total

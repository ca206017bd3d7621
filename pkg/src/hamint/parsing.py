"""Text form of expressions.

Grammar (whitespace insignificant)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom ("^" exponent)?
    exponent := ["-"] INT | "(" ["-"] INT ["/" INT] ")"
    atom   := INT | IDENT | DOP "(" expr ")" | "(" expr ")"

Identifiers are ``x``, ``u``, ``u1`` ... (aliases ``ux``, ``uxx``) and the
declared parameters.  ``D1(e)`` / ``Dk(e)`` apply the total x-derivative k
times.  A rational exponent with denominator 2, 3 or 5 introduces the radical.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .expr import (
    MAX_JET_ORDER,
    Expression,
    ExpressionError,
    RadicalError,
    _S,
    const,
    jet,
    param,
    radical,
    x_var,
)


class ParseError(ExpressionError):
    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        self.text = text
        super().__init__(f"{message} at position {pos}")


_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))")
_JET = re.compile(r"u(\d+)$")
_DOP = re.compile(r"D(\d+|x)$")
_RESERVED = {"x", "u", "ux", "uxx", "uxxx", "r"}


@dataclass
class _Tok:
    kind: str
    value: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
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
        toks.append(_Tok(kind, m.group(kind), start))
        pos = m.end()
    toks.append(_Tok("end", "", n))
    return toks


def check_param_names(params: Iterable[str]) -> tuple[str, ...]:
    out = []
    for p in params:
        p = p.strip()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", p):
            raise ParseError(f"bad parameter name {p!r}", 0)
        if p in _RESERVED or _JET.match(p) or _DOP.match(p):
            raise ParseError(f"parameter name {p!r} is reserved", 0)
        if p in out:
            raise ParseError(f"parameter {p!r} declared twice", 0)
        out.append(p)
    return tuple(out)


class _Parser:
    def __init__(self, text: str, params: tuple[str, ...]):
        self.text = text
        self.params = params
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value: str) -> _Tok:
        t = self.take()
        if t.value != value:
            raise ParseError(f"expected {value!r}, found {t.value or 'end of input'!r}", t.pos, self.text)
        return t

    def error(self, msg: str, tok: _Tok):
        raise ParseError(msg, tok.pos, self.text)

    def parse(self) -> Expression:
        e = self.expr()
        t = self.peek()
        if t.kind != "end":
            self.error(f"unexpected {t.value!r}", t)
        return e

    def expr(self) -> Expression:
        e = self.term()
        while self.peek().value in ("+", "-"):
            op = self.take()
            rhs = self.term()
            e = self._guard(lambda: e + rhs if op.value == "+" else e - rhs, op)
        return e

    def term(self) -> Expression:
        e = self.unary()
        while self.peek().value in ("*", "/"):
            op = self.take()
            rhs = self.unary()
            if op.value == "*":
                e = self._guard(lambda: e * rhs, op)
            else:
                if rhs.is_zero():
                    self.error("division by zero", op)
                e = self._guard(lambda: e / rhs, op)
        return e

    def unary(self) -> Expression:
        t = self.peek()
        if t.value == "-":
            self.take()
            return -self.unary()
        if t.value == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        if self.peek().value != "^":
            return base
        op = self.take()
        p, q = self.exponent()
        return self._guard(lambda: radical(base, p, q) if q != 1 else base ** p, op)

    def _int(self) -> int:
        t = self.take()
        if t.kind != "int":
            self.error("expected an integer exponent", t)
        return int(t.value)

    def exponent(self) -> tuple[int, int]:
        t = self.peek()
        if t.value == "(":
            self.take()
            sign = 1
            if self.peek().value == "-":
                self.take()
                sign = -1
            p = self._int()
            q = 1
            if self.peek().value == "/":
                self.take()
                q = self._int()
                if q == 0:
                    self.error("zero denominator in exponent", t)
            self.expect(")")
            f = Fraction(sign * p, q)
            return f.numerator, f.denominator
        sign = 1
        if t.value == "-":
            self.take()
            sign = -1
        return sign * self._int(), 1

    def atom(self) -> Expression:
        t = self.take()
        if t.kind == "int":
            return const(int(t.value))
        if t.value == "(":
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "ident":
            name = t.value
            dop = _DOP.match(name)
            if dop and self.peek().value == "(":
                self.take()
                inner = self.expr()
                self.expect(")")
                from .calculus import total_x
                k = 1 if dop.group(1) == "x" else int(dop.group(1))
                for _ in range(k):
                    inner = self._guard(lambda: total_x(inner), t)
                return inner
            return self.ident(t)
        self.error(f"unexpected {t.value or 'end of input'!r}", t)

    def ident(self, t: _Tok) -> Expression:
        name = t.value
        if name == "x":
            return x_var()
        if name == "u":
            return jet(0)
        if name in ("ux", "uxx", "uxxx"):
            return jet(len(name) - 1)
        m = _JET.match(name)
        if m:
            k = int(m.group(1))
            if k > MAX_JET_ORDER:
                self.error(f"jet order {k} exceeds the cap {MAX_JET_ORDER}", t)
            return jet(k)
        if name in self.params:
            return param(name)
        self.error(f"unknown identifier {name!r}", t)

    def _guard(self, thunk, tok: _Tok) -> Expression:
        try:
            return thunk()
        except RadicalError as exc:
            raise ParseError(str(exc), tok.pos, self.text) from exc
        except ZeroDivisionError as exc:
            raise ParseError(str(exc), tok.pos, self.text) from exc


def parse(text: str, params: Iterable[str] = ()) -> Expression:
    """Parse ``text``; identifiers in ``params`` are symbolic constants."""
    params = check_param_names(params)
    e = _Parser(text, params).parse()
    if params:
        e = e.with_params(params)
    return e


def parse_document(text: str, params: Iterable[str] = ()) -> tuple[Expression, tuple[str, ...]]:
    """Parse a ``.ham``/``.flow`` file body.

    Lines starting with ``#`` are comments; a ``params: a, b`` header declares
    parameters.  The remaining lines are joined into one expression.
    """
    declared = list(params)
    body = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            body.append("")
            continue
        if stripped.startswith("params:"):
            declared += [p for p in stripped[len("params:"):].split(",") if p.strip()]
            body.append("")
            continue
        body.append(line)
    names = check_param_names(dict.fromkeys(p.strip() for p in declared))
    # keep positions meaningful: join with spaces instead of dropping lines
    src = " ".join(body)
    if not src.strip():
        raise ParseError("empty expression", 0, src)
    return parse(src, names), names


# ---------------------------------------------------------------------------
# printing


def _fmt_q(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _gen_text(name: str) -> str:
    if name.startswith("p_"):
        return name[2:]
    if name == "u0":
        return "u"
    if name == _S:
        return "s_"
    return name


def _print_key(ring, exps: tuple[int, ...]):
    np_ = ring.nparams
    return exps[np_:] + exps[:np_]


def _monomial_text(ring, rad, exps: tuple[int, ...]) -> list[str]:
    np_ = ring.nparams
    # inside a monomial: parameters, x, u, u1, ..., radical
    order = list(range(np_)) + list(range(len(exps) - 1, np_ - 1, -1))
    factors = []
    for i in order:
        k = int(exps[i])
        if not k:
            continue
        name = ring.names[i]
        if name == "r":
            f = Fraction(k, rad.m)
            R = rad.radicand
            factors.append(f"({poly_text(R.num, R.ring, None)})^({_fmt_q(f)})")
            continue
        g = _gen_text(name)
        factors.append(g if k == 1 else f"{g}^{k}")
    return factors


def poly_text(poly, ring, rad=None) -> str:
    if poly.is_zero():
        return "0"
    terms = sorted(poly.terms(), key=lambda t: _print_key(ring, t[0]), reverse=True)
    parts = []
    for exps, c in terms:
        q = Fraction(int(c.p), int(c.q))
        factors = _monomial_text(ring, rad, exps)
        neg = q < 0
        a = abs(q)
        if not factors:
            body = _fmt_q(a)
        elif a == 1:
            body = "*".join(factors)
        else:
            body = _fmt_q(a) + "*" + "*".join(factors)
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)


def to_text(e: Expression) -> str:
    """Canonical text; ``parse(to_text(e)) == e``."""
    num = poly_text(e.num, e.ring, e.rad)
    if e.den.is_one():
        return num
    den = poly_text(e.den, e.ring, None)
    if len(list(e.num.terms())) > 1:
        num = f"({num})"
    nterms_den = len(list(e.den.terms()))
    single_factor = nterms_den == 1 and "*" not in den and den.count("^") <= 1
    if not single_factor:
        den = f"({den})"
    return f"{num}/{den}"

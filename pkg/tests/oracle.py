"""Independent reference implementations in sympy, fed through the printed text form."""

from __future__ import annotations

import re

import sympy

from hamint.parsing import to_text

X = sympy.Symbol("x")
U = [sympy.Symbol(f"u{i}") for i in range(30)]


def to_sympy(e, params=()) -> sympy.Expr:
    text = re.sub(r"\bu\b", "u0", to_text(e)).replace("^", "**")
    names = {"x": X, **{f"u{i}": s for i, s in enumerate(U)}}
    names.update({p: sympy.Symbol(p) for p in params})
    return sympy.sympify(text, locals=names, rational=True)


def top(f) -> int:
    orders = [i for i, s in enumerate(U) if f.has(s)]
    return max(orders, default=0)


def dx(f):
    return sympy.diff(f, X) + sum(U[i + 1] * sympy.diff(f, U[i]) for i in range(top(f) + 1))


def dxn(f, n):
    for _ in range(n):
        f = dx(f)
    return f


def euler(f):
    return sum((-1) ** k * dxn(sympy.diff(f, U[k]), k) for k in range(top(f) + 1))


def frechet(F, G):
    return sum(sympy.diff(F, U[i]) * dxn(G, i) for i in range(top(F) + 1))


def same(a, b) -> bool:
    return sympy.simplify(a - b) == 0

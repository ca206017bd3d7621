"""Rational integration in one jet coordinate.

Integrands are Expressions viewed as univariate rational functions of one
generator ``y`` over the field of the remaining generators.  Hermite
reduction splits an integrand into the derivative of a rational function and
a proper remainder with squarefree denominator (the logarithmic part).
"""

from __future__ import annotations

from .expr import Expression, Ring


class UPoly:
    """Dense univariate polynomial with Expression coefficients (low to high)."""

    __slots__ = ("c", "ring")

    def __init__(self, coeffs, ring: Ring):
        c = list(coeffs)
        while c and c[-1].is_zero():
            c.pop()
        self.c = c
        self.ring = ring

    @property
    def deg(self) -> int:
        return len(self.c) - 1

    def is_zero(self) -> bool:
        return not self.c

    def lc(self) -> Expression:
        return self.c[-1]

    def _zero(self) -> Expression:
        return Expression.constant(0, self.ring)

    def __add__(self, o: "UPoly") -> "UPoly":
        n = max(len(self.c), len(o.c))
        z = self._zero()
        return UPoly([(self.c[i] if i < len(self.c) else z) + (o.c[i] if i < len(o.c) else z)
                      for i in range(n)], self.ring)

    def __neg__(self) -> "UPoly":
        return UPoly([-a for a in self.c], self.ring)

    def __sub__(self, o: "UPoly") -> "UPoly":
        return self + (-o)

    def __mul__(self, o) -> "UPoly":
        if isinstance(o, Expression):
            return UPoly([a * o for a in self.c], self.ring)
        if self.is_zero() or o.is_zero():
            return UPoly([], self.ring)
        out = [self._zero() for _ in range(len(self.c) + len(o.c) - 1)]
        for i, a in enumerate(self.c):
            if a.is_zero():
                continue
            for j, b in enumerate(o.c):
                if not b.is_zero():
                    out[i + j] = out[i + j] + a * b
        return UPoly(out, self.ring)

    def divmod(self, o: "UPoly") -> tuple["UPoly", "UPoly"]:
        if o.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.c)
        if len(rem) < len(o.c):
            return UPoly([], self.ring), self
        q = [self._zero() for _ in range(len(rem) - len(o.c) + 1)]
        inv = o.lc().inverse()
        for k in range(len(rem) - len(o.c), -1, -1):
            coef = rem[k + len(o.c) - 1] * inv
            q[k] = coef
            if coef.is_zero():
                continue
            for j, b in enumerate(o.c):
                rem[k + j] = rem[k + j] - coef * b
        return UPoly(q, self.ring), UPoly(rem[: len(o.c) - 1], self.ring)

    def exquo(self, o: "UPoly") -> "UPoly":
        q, r = self.divmod(o)
        if not r.is_zero():
            raise ArithmeticError("inexact polynomial division")
        return q

    def derivative(self) -> "UPoly":
        return UPoly([a * i for i, a in enumerate(self.c)][1:], self.ring)

    def monic(self) -> "UPoly":
        if self.is_zero():
            return self
        inv = self.lc().inverse()
        return UPoly([a * inv for a in self.c], self.ring)

    def to_expression(self, y: Expression) -> Expression:
        out = self._zero()
        for a in reversed(self.c):
            out = out * y + a
        return out


def gcd(a: UPoly, b: UPoly) -> UPoly:
    while not b.is_zero():
        a, b = b, a.divmod(b)[1]
    return a.monic()


def half_gcdex(a: UPoly, b: UPoly) -> tuple[UPoly, UPoly]:
    """(s, g) with s*a ≡ g (mod b), g = gcd(a, b) monic."""
    ring = a.ring
    a1, a2 = UPoly([Expression.constant(1, ring)], ring), UPoly([], ring)
    while not b.is_zero():
        q, r = a.divmod(b)
        a, b = b, r
        a1, a2 = a2, a1 - q * a2
    inv = a.lc().inverse()
    return a1 * inv, a * inv


def solve_diophantine(a: UPoly, b: UPoly, c: UPoly) -> tuple[UPoly, UPoly]:
    """(s, t) with s*a + t*b = c and deg s < deg b."""
    s0, g = half_gcdex(a, b)
    q, r = c.divmod(g)
    if not r.is_zero():
        raise ArithmeticError("c is not in the ideal generated by a and b")
    s = s0 * q
    if not s.is_zero() and s.deg >= b.deg:
        s = s.divmod(b)[1]
    t = (c - s * a).exquo(b)
    return s, t


def split(e: Expression, var: str) -> tuple[UPoly, UPoly]:
    """Numerator and denominator of ``e`` as polynomials in the generator ``var``."""
    ring = e.ring
    v = ring.index[var]
    return _split_poly(e.num, ring, v, e.rad), _split_poly(e.den, ring, v, None)


def _split_poly(p, ring: Ring, v: int, rad) -> UPoly:
    if p.is_constant() or p.degrees()[v] == 0:
        return UPoly([Expression.make(ring, p, None, rad)], ring)
    buckets: list[dict] = [dict() for _ in range(p.degrees()[v] + 1)]
    for exps, c in p.terms():
        e = exps[v]
        buckets[e][exps[:v] + (0,) + exps[v + 1:]] = c
    return UPoly([Expression.make(ring, ring.ctx.from_dict(b), None, rad) for b in buckets], ring)


def _gen(ring: Ring, var: str) -> Expression:
    return Expression(ring, ring.gen(var), ring.one(), None)


def _hermite_proper(P: UPoly, A: UPoly, D: UPoly, ring: Ring):
    """Reduce A/D (deg A < deg D, D monic) to g' + L/D* with D* squarefree."""
    one = UPoly([Expression.constant(1, ring)], ring)
    g_num, g_den = UPoly([], ring), one
    Dm = gcd(D, D.derivative())
    Ds = D.exquo(Dm)
    while Dm.deg > 0:
        Dm2 = gcd(Dm, Dm.derivative())
        Dms = Dm.exquo(Dm2)
        B, C = solve_diophantine(-(Ds * Dm.derivative()).exquo(Dm), Dms, A)
        A = C - (B.derivative() * Ds).exquo(Dms)
        # g += B / Dm
        g_num = g_num * Dm + B * g_den
        g_den = g_den * Dm
        Dm = Dm2
    Q2, L = A.divmod(Ds)
    return P + Q2, g_num, g_den, L, Ds


def _poly_antiderivative(P: UPoly) -> UPoly:
    ring = P.ring
    return UPoly([Expression.constant(0, ring)] + [a / (i + 1) for i, a in enumerate(P.c)], ring)


def integrate(e: Expression, var: str) -> tuple[Expression, Expression]:
    """Split ``e`` as ∂_var Q + L; returns (Q, L) with L the logarithmic part.

    L is zero when ``e`` has a rational antiderivative in ``var``.  Otherwise
    L is proper in ``var`` with a squarefree denominator.
    """
    ring = e.ring
    v = ring.index[var]
    zero = Expression.constant(0, ring)
    den_free = e.den.is_constant() or e.den.degrees()[v] == 0
    if den_free:
        num = e.num
        if num.is_zero():
            return zero, zero
        return Expression.make(ring, num.integral(v), e.den, e.rad), zero
    A, D = split(e, var)
    lc = D.lc()
    A = A * lc.inverse()
    D = D.monic()
    P, A = A.divmod(D)
    P, g_num, g_den, L, Ds = _hermite_proper(P, A, D, ring)
    y = _gen(ring, var)
    Q = _poly_antiderivative(P).to_expression(y)
    if not g_num.is_zero():
        Q = Q + g_num.to_expression(y) / g_den.to_expression(y)
    if L.is_zero():
        return Q, zero
    return Q, L.to_expression(y) / Ds.to_expression(y)

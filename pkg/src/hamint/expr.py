"""Exact expressions over the jet ring.

An :class:`Expression` is a reduced fraction ``num/den`` of polynomials with
rational coefficients in the generators

    x, u = u0, u1, ..., u{MAX_JET_ORDER}, r, parameters

where ``r`` is an optional radical generator tied to the expression by the
relation ``r**m == R``.  Denominators are kept free of ``r`` (inverses of
radical elements are rationalised), numerators carry ``r`` only in powers
``0 .. m-1``, and the denominator is monic with respect to the canonical
monomial order.  With those rules equal values have identical
representations, so equality is structural.

The canonical monomial order is graded lexicographic with
``x < u < u1 < ... < r < parameters`` (parameters compared by name).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

import flint
from sympy import factorint

MAX_JET_ORDER = 24

RADICAL_INDICES = (2, 3, 5)

# internal generator names; parameters are prefixed so user names never clash
_R = "r"
_S = "s_"


class ExpressionError(ValueError):
    pass


class JetOrderError(ExpressionError):
    """A computation needed a jet variable beyond MAX_JET_ORDER."""


class RadicalError(ExpressionError):
    pass


def _jet_name(i: int) -> str:
    return f"u{i}"


class Ring:
    """Generator layout for one sorted tuple of parameter names."""

    __slots__ = ("params", "ctx", "names", "index", "_gens")

    def __init__(self, params: tuple[str, ...]):
        self.params = params
        names = [f"p_{p}" for p in params] + [_R, _S]
        names += [_jet_name(i) for i in range(MAX_JET_ORDER, -1, -1)] + ["x"]
        self.names = tuple(names)
        self.ctx = flint.fmpq_mpoly_ctx.get(self.names, "deglex")
        self.index = {n: i for i, n in enumerate(self.names)}
        self._gens = self.ctx.gens()

    def __repr__(self) -> str:
        return f"Ring(params={self.params!r})"

    @property
    def nparams(self) -> int:
        return len(self.params)

    def gen(self, name: str):
        return self._gens[self.index[name]]

    def jet_index(self, i: int) -> int:
        if i > MAX_JET_ORDER:
            raise JetOrderError(f"jet order {i} exceeds the cap {MAX_JET_ORDER}")
        return self.index[_jet_name(i)]

    @property
    def r_index(self) -> int:
        return self.nparams

    @property
    def s_index(self) -> int:
        return self.nparams + 1

    @property
    def x_index(self) -> int:
        return len(self.names) - 1

    def param_index(self, name: str) -> int:
        return self.index[f"p_{name}"]

    def jet_order(self, poly) -> int:
        """Highest jet index occurring in ``poly``; -1 when no jet occurs."""
        if poly.is_constant():
            return -1
        degs = poly.degrees()
        start = self.nparams + 2
        for k in range(start, start + MAX_JET_ORDER + 1):
            if degs[k] > 0:
                return MAX_JET_ORDER - (k - start)
        return -1

    def zero(self):
        return self.ctx.from_dict({})

    def one(self):
        return self.ctx.constant(1)

    def constant(self, value):
        return self.ctx.constant(flint.fmpq(value.numerator, value.denominator)
                                 if isinstance(value, Fraction) else value)


@lru_cache(maxsize=None)
def ring_for(params: tuple[str, ...] = ()) -> Ring:
    return Ring(tuple(sorted(set(params))))


def _project(poly, src: Ring, dst: Ring):
    if src is dst:
        return poly
    return poly.project_to_context(dst.ctx)


def _union(a: Ring, b: Ring) -> Ring:
    if a is b:
        return a
    if set(b.params) <= set(a.params):
        return a
    if set(a.params) <= set(b.params):
        return b
    return ring_for(tuple(set(a.params) | set(b.params)))


def _to_fraction(c) -> Fraction:
    return Fraction(int(c.p), int(c.q))


def _fmpq(q) -> flint.fmpq:
    q = Fraction(q)
    return flint.fmpq(q.numerator, q.denominator)


# ---------------------------------------------------------------------------
# radical contexts


@dataclass(frozen=True, eq=False)
class RadicalContext:
    """``r**m == radicand``; the radicand is a radical-free polynomial."""

    m: int
    radicand: "Expression"

    def __post_init__(self):
        if self.m not in RADICAL_INDICES:
            raise RadicalError(f"radical index {self.m} not in {RADICAL_INDICES}")
        R = self.radicand
        if R.rad is not None or not R.is_polynomial():
            raise RadicalError("radicand must be a radical-free polynomial")

    def __eq__(self, other) -> bool:
        if not isinstance(other, RadicalContext):
            return NotImplemented
        return self.m == other.m and self.radicand == other.radicand

    def __hash__(self) -> int:
        return hash((self.m, self.radicand))

    def poly(self, ring: Ring):
        R = self.radicand
        return _project(R.num, R.ring, ring)

    @property
    def order(self) -> int:
        return self.radicand.order


def _merge_rad(a: RadicalContext | None, b: RadicalContext | None) -> RadicalContext | None:
    if a is None:
        return b
    if b is None or a is b:
        return a
    if a != b:
        raise RadicalError("expression would need a second radical generator")
    return a


def _split_r(poly, ring: Ring) -> list:
    """Coefficients of ``poly`` as a polynomial in r."""
    ri = ring.r_index
    d = poly.degrees()[ri] if not poly.is_constant() else 0
    if d == 0:
        return [poly]
    buckets: list[dict] = [dict() for _ in range(d + 1)]
    for exps, c in poly.terms():
        e = exps[ri]
        key = exps[:ri] + (0,) + exps[ri + 1:]
        buckets[e][key] = c
    return [ring.ctx.from_dict(b) for b in buckets]


def _join_r(coeffs: list, ring: Ring):
    r = ring.gen(_R)
    out = ring.zero()
    power = ring.one()
    for i, c in enumerate(coeffs):
        if i:
            power = power * r
        if not c.is_zero():
            out += c * power
    return out


def _reduce_r(poly, ring: Ring, rad: RadicalContext | None):
    if rad is None or poly.is_constant():
        return poly
    if poly.degrees()[ring.r_index] < rad.m:
        return poly
    m = rad.m
    R = rad.poly(ring)
    coeffs = _split_r(poly, ring)
    reduced = [ring.zero() for _ in range(m)]
    Rpow = [ring.one()]
    for e, c in enumerate(coeffs):
        if c.is_zero():
            continue
        q, rem = divmod(e, m)
        while len(Rpow) <= q:
            Rpow.append(Rpow[-1] * R)
        reduced[rem] += c * Rpow[q]
    return _join_r(reduced, ring)


def _bareiss_det(mat: list[list]):
    """Determinant of a square matrix of polynomials (fraction free)."""
    n = len(mat)
    a = [row[:] for row in mat]
    sign = 1
    prev = None
    for k in range(n - 1):
        if a[k][k].is_zero():
            for i in range(k + 1, n):
                if not a[i][k].is_zero():
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return a[0][0] * 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                t = a[i][j] * a[k][k] - a[i][k] * a[k][j]
                a[i][j] = t if prev is None else t / prev
        prev = a[k][k]
    return a[n - 1][n - 1] * sign


def _rationalize(num, ring: Ring, rad: RadicalContext):
    """Return (adj, norm) with num * adj == norm and norm free of r."""
    m = rad.m
    R = rad.poly(ring)
    coeffs = _split_r(num, ring) + [ring.zero()] * m
    coeffs = coeffs[:m]
    # column j holds num * r**j written in the basis 1, r, ..., r**(m-1)
    cols = []
    for j in range(m):
        col = [ring.zero() for _ in range(m)]
        for i, c in enumerate(coeffs):
            if c.is_zero():
                continue
            e = i + j
            if e >= m:
                col[e - m] += c * R
            else:
                col[e] += c
        cols.append(col)
    mat = [[cols[j][i] for j in range(m)] for i in range(m)]
    det = _bareiss_det(mat)
    if det.is_zero():
        raise ZeroDivisionError("radical element is a zero divisor (reducible radicand?)")
    adj = []
    for j in range(m):
        sub = [row[:] for row in mat]
        for i in range(m):
            sub[i][j] = ring.one() if i == 0 else ring.zero()
        adj.append(_bareiss_det(sub))
    return _join_r(adj, ring), det


# ---------------------------------------------------------------------------
# expressions


class Expression:
    __slots__ = ("ring", "num", "den", "rad", "_hash")

    def __init__(self, ring: Ring, num, den, rad: RadicalContext | None):
        # trusted constructor: arguments already normalised
        self.ring = ring
        self.num = num
        self.den = den
        self.rad = rad
        self._hash = None

    # -- construction -----------------------------------------------------

    @classmethod
    def make(cls, ring: Ring, num, den=None, rad: RadicalContext | None = None) -> "Expression":
        """Normalise ``num/den`` (den free of r) into canonical form."""
        if den is None:
            den = ring.one()
        if den.is_zero():
            raise ZeroDivisionError("division by an expression that normalizes to zero")
        if rad is not None:
            if not den.is_constant() and den.degrees()[ring.r_index] > 0:
                adj, norm = _rationalize(den, ring, rad)
                num = num * adj
                den = norm
            num = _reduce_r(num, ring, rad)
        if num.is_zero():
            return cls(ring, ring.zero(), ring.one(), None)
        if not den.is_constant():
            g = num.gcd(den)
            if not g.is_constant():
                num = num / g
                den = den / g
        lc = den.leading_coefficient()
        if lc != 1:
            num = num / lc
            den = den / lc
        if rad is not None and (num.is_constant() or num.degrees()[ring.r_index] == 0):
            rad = None
        return cls(ring, num, den, rad)

    @classmethod
    def constant(cls, value, ring: Ring | None = None) -> "Expression":
        ring = ring or ring_for()
        return cls.make(ring, ring.ctx.constant(_fmpq(value)))

    # -- structure --------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def is_constant(self) -> bool:
        return self.den.is_constant() and self.num.is_constant()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ExpressionError("expression is not a rational constant")
        return _to_fraction(self.num.leading_coefficient()) if not self.num.is_zero() else Fraction(0)

    def is_rational_constant(self) -> bool:
        return self.is_constant()

    @property
    def order(self) -> int:
        """Highest jet order (radicand included); -1 for functions of x only."""
        o = max(self.ring.jet_order(self.num), self.ring.jet_order(self.den))
        if self.rad is not None:
            o = max(o, self.rad.order)
        return o

    def has_radical(self) -> bool:
        return self.rad is not None

    def _degs(self, poly, idx: int) -> int:
        return 0 if poly.is_constant() else poly.degrees()[idx]

    def depends_on_x(self) -> bool:
        i = self.ring.x_index
        if self._degs(self.num, i) or self._degs(self.den, i):
            return True
        return self.rad is not None and self.rad.radicand.depends_on_x()

    def depends_on_jet(self, k: int) -> bool:
        if k > MAX_JET_ORDER:
            return False
        i = self.ring.jet_index(k)
        if self._degs(self.num, i) or self._degs(self.den, i):
            return True
        return self.rad is not None and self.rad.radicand.depends_on_jet(k)

    def free_params(self) -> set[str]:
        out = set()
        for name in self.ring.params:
            i = self.ring.param_index(name)
            if self._degs(self.num, i) or self._degs(self.den, i):
                out.add(name)
        if self.rad is not None:
            out |= self.rad.radicand.free_params()
        return out

    def in_ring(self, ring: Ring) -> "Expression":
        if ring is self.ring:
            return self
        return Expression(ring, _project(self.num, self.ring, ring),
                          _project(self.den, self.ring, ring), self.rad)

    def with_params(self, params: Iterable[str]) -> "Expression":
        return self.in_ring(_union(self.ring, ring_for(tuple(params))))

    # -- arithmetic -------------------------------------------------------

    @staticmethod
    def _coerce(other) -> "Expression":
        if isinstance(other, Expression):
            return other
        if isinstance(other, (int, Fraction)):
            return Expression.constant(other)
        return NotImplemented

    def _aligned(self, other: "Expression"):
        ring = _union(self.ring, other.ring)
        a = self.in_ring(ring)
        b = other.in_ring(ring)
        return ring, a, b, _merge_rad(self.rad, other.rad)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        ring, a, b, rad = self._aligned(other)
        if a.den == b.den:
            num = a.num + b.num
            if a.den.is_constant():
                if rad is not None and num.is_zero():
                    rad = None
                if num.is_zero():
                    return Expression(ring, ring.zero(), ring.one(), None)
                if rad is not None and num.degrees()[ring.r_index] == 0:
                    rad = None
                return Expression(ring, num, a.den, rad)
            return Expression.make(ring, num, a.den, rad)
        g = a.den.gcd(b.den)
        bd = b.den / g
        num = a.num * bd + b.num * (a.den / g)
        return Expression.make(ring, num, a.den * bd, rad)

    __radd__ = __add__

    def __neg__(self):
        return Expression(self.ring, -self.num, self.den, self.rad)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return Expression(self.ring, self.ring.zero(), self.ring.one(), None).in_ring(
                _union(self.ring, other.ring))
        ring, a, b, rad = self._aligned(other)
        if a.den.is_constant() and b.den.is_constant():
            num = a.num * b.num
            if a.rad is not None and b.rad is not None:
                return Expression.make(ring, num, ring.one(), rad)
            return Expression(ring, num, ring.one(), rad)
        if rad is None or a.rad is None or b.rad is None:
            # no new r powers appear: cross-cancel and stay canonical
            g1 = a.num.gcd(b.den)
            g2 = b.num.gcd(a.den)
            num = (a.num / g1) * (b.num / g2)
            den = (a.den / g2) * (b.den / g1)
            lc = den.leading_coefficient()
            if lc != 1:
                num = num / lc
                den = den / lc
            return Expression(ring, num, den, rad)
        return Expression.make(ring, a.num * b.num, a.den * b.den, rad)

    __rmul__ = __mul__

    def inverse(self) -> "Expression":
        if self.is_zero():
            raise ZeroDivisionError("division by an expression that normalizes to zero")
        if self.rad is None:
            num, den = self.den, self.num
            lc = den.leading_coefficient()
            return Expression(self.ring, num / lc, den / lc, None)
        return Expression.make(self.ring, self.den, self.num, self.rad)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("only integer powers; use radical() for rational exponents")
        if k < 0:
            return self.inverse() ** (-k)
        if k == 0:
            return Expression.make(self.ring, self.ring.one())
        if self.rad is None:
            return Expression(self.ring, self.num ** k, self.den ** k, None)
        result = None
        base = self
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # -- comparison -------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.constant_value() == other
        if not isinstance(other, Expression):
            return NotImplemented
        if self.rad != other.rad:
            if self.rad is None or other.rad is None:
                return False
            if self.rad.m != other.rad.m or self.rad.radicand != other.rad.radicand:
                return False
        if self.ring is not other.ring:
            ring = _union(self.ring, other.ring)
            return (self.in_ring(ring).num == other.in_ring(ring).num
                    and self.in_ring(ring).den == other.in_ring(ring).den)
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        if self._hash is None:
            # hash must agree across parameter rings, so go through text
            from .parsing import to_text
            self._hash = hash(to_text(self))
        return self._hash

    def __repr__(self) -> str:
        from .parsing import to_text
        return f"Expression({to_text(self)!r})"

    def __str__(self) -> str:
        from .parsing import to_text
        return to_text(self)

    # -- substitution -----------------------------------------------------

    def numerator(self) -> "Expression":
        return Expression(self.ring, self.num, self.ring.one(), self.rad)

    def denominator(self) -> "Expression":
        return Expression(self.ring, self.den, self.ring.one(), None)


# ---------------------------------------------------------------------------
# generators


def const(value, params: Iterable[str] = ()) -> Expression:
    return Expression.constant(value, ring_for(tuple(params)))


def x_var(params: Iterable[str] = ()) -> Expression:
    ring = ring_for(tuple(params))
    return Expression(ring, ring.gen("x"), ring.one(), None)


def jet(i: int, params: Iterable[str] = ()) -> Expression:
    ring = ring_for(tuple(params))
    return Expression(ring, ring._gens[ring.jet_index(i)], ring.one(), None)


def param(name: str, params: Iterable[str] = ()) -> Expression:
    ring = ring_for(tuple(params) + (name,))
    return Expression(ring, ring.gen(f"p_{name}"), ring.one(), None)


def _internal_s(ring: Ring) -> Expression:
    return Expression(ring, ring.gen(_S), ring.one(), None)


def _mth_power_split(n: int, m: int) -> tuple[int, int]:
    """Write positive n as k**m * rest with rest m-th power free."""
    k, rest = 1, 1
    for p, e in factorint(n).items():
        k *= p ** (e // m)
        rest *= p ** (e % m)
    return k, rest


def radical(base: Expression, p: int, q: int) -> Expression:
    """``base ** (p/q)`` for q in RADICAL_INDICES, introducing the radical generator."""
    if q == 1:
        return base ** p
    if q not in RADICAL_INDICES:
        raise RadicalError(f"radical index {q} not supported")
    if base.rad is not None:
        raise RadicalError("nested radicals are not supported")
    if base.is_zero():
        if p <= 0:
            raise ZeroDivisionError("zero to a non-positive power")
        return base
    ring = base.ring
    m = q
    # base**(1/m) = (num*den**(m-1))**(1/m) / den
    P = base.num * base.den ** (m - 1)
    c, factors = P.factor()
    coeff = ring.one()
    R = ring.one()
    for f, e in factors:
        coeff *= f ** (e // m)
        R *= f ** (e % m)
    c = _to_fraction(c)
    sign = 1
    if c < 0 and m % 2 == 1:
        sign, c = -1, -c
    num_int = abs(c.numerator) * c.denominator ** (m - 1)
    k, rest = _mth_power_split(num_int, m)
    const_coeff = Fraction(sign * k, c.denominator)
    const_R = rest if c >= 0 else -rest
    R = R * const_R
    root = Expression.make(ring, coeff * _fmpq(const_coeff), base.den)
    if R.is_constant() and R.leading_coefficient() == 1:
        return root ** p
    ctx = RadicalContext(m, Expression.make(ring, R))
    rgen = Expression(ring, ring.gen(_R), ring.one(), ctx)
    if p >= 0:
        return (root * rgen) ** p if p else Expression.constant(1, ring)
    return ((root * rgen).inverse()) ** (-p)


def radical_generator(ctx: RadicalContext) -> Expression:
    ring = ctx.radicand.ring
    return Expression(ring, ring.gen(_R), ring.one(), ctx)


# ---------------------------------------------------------------------------
# evaluation


def eval_at(e: Expression, point: Mapping[str, object]) -> Fraction:
    """Exact value of ``e`` at ``point``.

    Keys are ``x``, ``u``/``u0``, ``u1``, ..., parameter names, and ``r`` for the
    radical (its value must satisfy ``r**m == R(point)``).
    """
    ring = e.ring
    vals = []
    pt = {("u0" if k == "u" else k): Fraction(v) for k, v in point.items()}
    needed = _used_names(e)
    for name in ring.names:
        key = name[2:] if name.startswith("p_") else name
        if key in pt:
            vals.append(_fmpq(pt[key]))
        elif key in needed:
            raise ExpressionError(f"point does not assign {key}")
        else:
            vals.append(flint.fmpq(0))
    if e.rad is not None:
        R = eval_at(e.rad.radicand, point)
        rv = pt.get("r")
        if rv is None or rv ** e.rad.m != R:
            raise ExpressionError("inconsistent radical assignment")
    d = e.den(*vals)
    if d == 0:
        raise ZeroDivisionError("denominator vanishes at point")
    return _to_fraction(e.num(*vals) / d)


def _used_names(e: Expression) -> set[str]:
    out = set()
    for poly in (e.num, e.den):
        if poly.is_constant():
            continue
        for i, d in enumerate(poly.degrees()):
            if d:
                n = e.ring.names[i]
                out.add(n[2:] if n.startswith("p_") else n)
    if e.rad is not None:
        out |= _used_names(e.rad.radicand)
    return out


def used_names(e: Expression) -> set[str]:
    return _used_names(e)


# ---------------------------------------------------------------------------
# composition


def compose(e: Expression, mapping: Mapping[str, Expression]) -> Expression:
    """Substitute expressions for generators (``x``, ``u0``.., params, ``r``, ``s_``).

    Unmapped generators stay as they are.  When the radical generator is not
    mapped but the radicand changes, the radical is re-rooted on the mapped
    radicand.
    """
    ring = e.ring
    targets = {("u0" if k == "u" else k): v for k, v in mapping.items()}
    if e.rad is not None and _R not in targets:
        newR = compose(e.rad.radicand, targets)
        if newR != e.rad.radicand:
            targets[_R] = radical(newR, 1, e.rad.m)
        else:
            targets[_R] = radical_generator(e.rad)
    out_ring = ring
    for v in targets.values():
        out_ring = _union(out_ring, v.ring)
    gens: list[Expression | None] = []
    for name in ring.names:
        key = name[2:] if name.startswith("p_") else name
        gens.append(targets.get(key))
    num = _compose_poly(e.num, ring, gens, out_ring)
    den = _compose_poly(e.den, ring, gens, out_ring)
    return num / den


def _compose_poly(poly, ring: Ring, gens: list, out_ring: Ring) -> Expression:
    if poly.is_constant():
        return Expression.make(out_ring, out_ring.ctx.constant(poly.leading_coefficient())
                               if not poly.is_zero() else out_ring.zero())
    degs = poly.degrees()
    used = [i for i, d in enumerate(degs) if d]
    if all(gens[i] is None or gens[i].is_polynomial() for i in used):
        rad = None
        args = []
        for i, g in enumerate(gens):
            if g is None or i not in used:
                args.append(out_ring.gen(ring.names[i]))
            else:
                rad = _merge_rad(rad, g.rad)
                args.append(g.in_ring(out_ring).num)
        return Expression.make(out_ring, poly.compose(*args, ctx=out_ring.ctx), None, rad)
    cache: dict[tuple[int, int], Expression] = {}

    def power(i, k):
        key = (i, k)
        if key not in cache:
            g = gens[i]
            if g is None:
                g = Expression(out_ring, out_ring.gen(ring.names[i]), out_ring.one(), None)
            cache[key] = g ** k
        return cache[key]

    total = Expression.constant(0, out_ring)
    for exps, c in poly.terms():
        term = Expression.constant(_to_fraction(c), out_ring)
        for i in used:
            k = int(exps[i])
            if k:
                term = term * power(i, k)
        total = total + term
    return total

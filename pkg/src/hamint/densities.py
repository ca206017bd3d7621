"""Canonical densities of fifth-order equations u_t = F(x, u, ..., u_5)."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, prod

from .calculus import Flow, jet_partial, total_x, total_x_n
from .expr import (
    Expression,
    ExpressionError,
    _mth_power_split,
    _to_fraction,
    radical,
    radical_generator,
)


class RootExtractionError(ExpressionError):
    """1/F_5 is not a fifth power in the expression ring."""


class MissingDensity(ExpressionError):
    pass


# ---------------------------------------------------------------------------
# fifth roots


def _split_constant(c: Fraction) -> tuple[Fraction, Fraction]:
    """c = a**5 * b with b the fifth-power-free part (sign kept in b)."""
    sign = -1 if c < 0 else 1
    ka, ra = _mth_power_split(abs(c.numerator), 5)
    kb, rb = _mth_power_split(c.denominator, 5)
    return Fraction(ka, kb), Fraction(sign * ra, rb)


def _poly_root5(poly, ring):
    """(constant, root) with poly = constant * root**5, or None."""
    c, factors = poly.factor()
    root = ring.one()
    for f, e in factors:
        if e % 5:
            return None
        root *= f ** (e // 5)
    return _to_fraction(c), root


def _fifth_root(G: Expression) -> tuple[Fraction, Expression] | None:
    """Find (c, P) with G = c * P**5 and P free of rational constants."""
    ring = G.ring
    rad = G.rad
    if rad is None:
        cands = [(0, 0, G)]
    else:
        ri = ring.r_index
        powers = {int(ex[ri]) for ex, _ in G.num.terms()}
        if len(powers) != 1:
            return None
        j = powers.pop()
        # strip r^j: what remains is r-free
        rgen = radical_generator(rad)
        base = Expression.make(ring, G.num, G.den, rad) * rgen ** (-j) if j else G
        cands = []
        for i in range(rad.m):
            if (5 * i) % rad.m == j % rad.m:
                t = (5 * i - j) // rad.m
                cands.append((i, t, base * rad.radicand ** (-t)))
    for i, _t, B in cands:
        if B.rad is not None:
            continue
        num = _poly_root5(B.num, ring)
        den = _poly_root5(B.den, ring)
        if num is None or den is None:
            continue
        c = num[0] / den[0]
        P = Expression.make(ring, num[1], den[1])
        if i:
            P = P * radical_generator(rad) ** i
        return c, P
    return None


@dataclass(frozen=True)
class LeadingNormalization:
    """ρ_{-1} together with the time scale applied to reach it."""

    rho: Expression
    time_scale: Fraction
    flow: Flow


def normalize_leading(F: Flow, allow_scale: bool = True, allow_radical: bool = True) -> LeadingNormalization:
    """Compute ρ_{-1} = F_5^{-1/5}, rescaling t when the constant is not a rational fifth power."""
    if F.order != 5:
        raise RootExtractionError(f"flow has order {F.order}, expected 5")
    G = jet_partial(F.rhs, 5).inverse()
    found = _fifth_root(G)
    if found is None:
        if G.rad is not None or not allow_radical:
            raise RootExtractionError("1/F_5 is not a fifth power")
        return LeadingNormalization(radical(G, 1, 5), Fraction(1), F)
    c, P = found
    a, b = _split_constant(c)
    if b != 1:
        if not allow_scale:
            raise RootExtractionError(f"constant {c} is not a rational fifth power")
        F = F.scaled(Expression.constant(b))
    return LeadingNormalization(P * a, b, F)


def rho_minus1(F: Flow) -> Expression:
    """The principal density a with a**5 = 1/F_5 (no rescaling)."""
    return normalize_leading(F, allow_scale=False).rho


# ---------------------------------------------------------------------------
# closed forms


def rho0_rho1_closed(F: Flow, rho: Expression | None = None) -> tuple[Expression, Expression]:
    if rho is None:
        rho = rho_minus1(F)
    F3 = F.coefficient(3)
    F4 = F.coefficient(4)
    d1 = total_x(rho)
    d2 = total_x(d1)
    inv = rho.inverse()
    rho4 = rho ** 4
    rho0 = -F4 * rho ** 5 / 5 - 2 * inv * d1
    rho1 = (F4 * total_x(rho4) / 2 + rho4 * total_x(F4) * Fraction(2, 5)
            + rho ** 9 * F4 ** 2 * Fraction(2, 25) - rho4 * F3 / 5
            - 3 * inv ** 3 * d1 ** 2 + 2 * inv ** 2 * d2)
    return rho0, rho1


# ---------------------------------------------------------------------------
# chain


@dataclass
class ChainEntry:
    n: int
    rho: Expression
    theta: Expression | None = None
    status: str = "not-checked"
    note: str = ""


@dataclass
class DensityChain:
    flow: Flow
    rho_m1: Expression
    entries: dict[int, ChainEntry] = field(default_factory=dict)
    _dx_cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def start(cls, F: Flow, rho_m1: Expression | None = None) -> "DensityChain":
        if rho_m1 is None:
            rho_m1 = rho_minus1(F)
        chain = cls(F, rho_m1)
        chain.entries[-1] = ChainEntry(-1, rho_m1)
        return chain

    def rho(self, j: int) -> Expression:
        if j <= -2:
            return Expression.constant(0, self.rho_m1.ring)
        if j not in self.entries:
            raise MissingDensity(f"rho_{j} is not available")
        return self.entries[j].rho

    def theta(self, j: int) -> Expression:
        if j <= -2:
            return Expression.constant(0, self.rho_m1.ring)
        e = self.entries.get(j)
        if e is None or e.theta is None:
            raise MissingDensity(f"theta_{j} is not available")
        return e.theta

    def drho(self, j: int, k: int = 1) -> Expression:
        """D_x^k ρ_j, memoised."""
        if k == 0:
            return self.rho(j)
        key = (j, k)
        if key not in self._dx_cache:
            self._dx_cache[key] = total_x(self.drho(j, k - 1))
        return self._dx_cache[key]

    def add(self, n: int, rho: Expression) -> ChainEntry:
        entry = ChainEntry(n, rho)
        self.entries[n] = entry
        return entry


def _multisets(arity: int, total: int, lower: int):
    """Nondecreasing index tuples ≥ lower summing to total."""
    top = total - (arity - 1) * lower
    if top < lower:
        return

    def rec(prefix, k, remaining, start):
        if k == 1:
            if remaining >= start:
                yield prefix + (remaining,)
            return
        for i in range(start, remaining - (k - 1) * start + 1):
            if remaining - i < (k - 1) * i:
                break
            yield from rec(prefix + (i,), k - 1, remaining - i, i)

    yield from rec((), arity, total, lower)


def _permutations_count(t: tuple) -> int:
    counts = Counter(t)
    return factorial(len(t)) // prod(factorial(c) for c in counts.values())


def restricted_sum(chain: DensityChain, arity: int, total: int, lower: int = -1,
                   exclude: int | None = None) -> Expression:
    """Σ over ordered tuples I_s ≥ lower with I_1 + ... + I_k = total of ρ_{I_1}...ρ_{I_k}.

    Tuples containing ``exclude`` are skipped.
    """
    if not 2 <= arity <= 5:
        raise ValueError("arity must be between 2 and 5")
    out = Expression.constant(0, chain.rho_m1.ring)
    for t in _multisets(arity, total, lower):
        if exclude is not None and exclude in t:
            continue
        factors = [chain.rho(i) for i in t]
        if any(f.is_zero() for f in factors):
            continue
        out = out + prod(factors[1:], start=factors[0]) * _permutations_count(t)
    return out


def _sum_dd(chain: DensityChain, total: int) -> Expression:
    """Σ D_x(ρ_i) D_x(ρ_j) over i + j = total."""
    out = Expression.constant(0, chain.rho_m1.ring)
    for t in _multisets(2, total, -1):
        a, b = chain.drho(t[0]), chain.drho(t[1])
        if a.is_zero() or b.is_zero():
            continue
        out = out + a * b * _permutations_count(t)
    return out


def _sum_rdd(chain: DensityChain, total: int) -> Expression:
    """Σ ρ_i D_x(ρ_j) D_x(ρ_k) over i + j + k = total (symmetric in j, k)."""
    out = Expression.constant(0, chain.rho_m1.ring)
    for i in range(-1, total + 3):
        ri = chain.rho(i)
        if ri.is_zero():
            continue
        for t in _multisets(2, total - i, -1):
            a, b = chain.drho(t[0]), chain.drho(t[1])
            if a.is_zero() or b.is_zero():
                continue
            out = out + ri * a * b * _permutations_count(t)
    return out


def recurrence_step(chain: DensityChain, n: int) -> Expression:
    """ρ_{n+4} from ρ_{-1}, ..., ρ_{n+3} and θ_n."""
    if n < -4:
        raise ValueError("the recurrence starts at n = -4")
    F = chain.flow
    R = chain.rho_m1
    Fi = [F.coefficient(i) for i in range(5)]
    rn = chain.rho(n)
    D = total_x
    S2 = restricted_sum(chain, 2, n)
    S3 = restricted_sum(chain, 3, n)
    S4 = restricted_sum(chain, 4, n)
    S5 = restricted_sum(chain, 5, n, exclude=n + 4)
    P2 = _sum_dd(chain, n)
    P3 = _sum_rdd(chain, n)
    d = [chain.drho(n, k) if not rn.is_zero() else rn for k in range(5)]
    th = chain.theta(n) if n >= -1 else Expression.constant(0, R.ring)

    inner = Fi[1] * rn + Fi[2] * d[1] + Fi[2] * S2 + Fi[3] * d[2]
    if n == 0:
        inner = inner + Fi[0]
    inner = inner + Fi[3] * (D(S2) * Fraction(3, 2) + S3)
    inner = inner + Fi[4] * (d[3] + 2 * total_x_n(S2, 2))
    inner = inner + Fi[4] * (-P2 + 2 * D(S3) + S4)
    tail = (d[4] / 5 + total_x_n(S2, 3) / 2 - D(P2) / 2 + total_x_n(S3, 2) * Fraction(2, 3)
            - P3 + D(S4) / 2 + S5 / 5)
    return R * th / 5 - R * inner / 5 - R.inverse() ** 4 * tail

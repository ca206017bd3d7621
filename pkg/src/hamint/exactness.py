"""Membership in Im D_x by order lowering.

Given S of jet order n, S can only be a total derivative if it is linear in
u_n.  Writing S = A*u_n + B, any flux Q has ∂Q/∂u_{n-1} = A, so one
integration in u_{n-1} removes the top jet and the procedure repeats until
S vanishes or turns out to be nonlinear in its highest jet.

Antiderivatives may pick up logarithms.  Those are kept as formal
:class:`LogTerm` records (only the constant-residue case is admitted); their
total derivatives are rational and are subtracted like any other flux part.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Sequence

from .calculus import jet_partial, partial, total_x
from .expr import (
    Expression,
    ExpressionError,
    RadicalContext,
    _S,
    _internal_s,
    _to_fraction,
    compose,
    const,
    jet,
    radical_generator,
)
from .integrate import integrate
from .parsing import to_text


class UnsupportedShape(ExpressionError):
    """The lowering hit a radical it cannot integrate through."""


@dataclass(frozen=True)
class LogTerm:
    """A formal logarithmic flux part Λ = ∫ L d(var); ``dx`` is D_x Λ (rational)."""

    integrand: Expression
    var: str
    dx: Expression


@dataclass
class ExactnessResult:
    verdict: str
    flux: Expression | None = None
    residue: Expression | None = None
    failing_order: int | None = None
    log_terms: list[LogTerm] = field(default_factory=list)

    @property
    def exact(self) -> bool:
        return self.verdict == "exact"

    @property
    def flux_is_rational(self) -> bool:
        """True when the flux is fully represented by ``flux`` (no log terms)."""
        return self.exact and not self.log_terms


@dataclass
class Obstruction:
    residue: Expression
    constraints: list[Expression]

    @property
    def empty(self) -> bool:
        return not self.constraints


# ---------------------------------------------------------------------------
# splitting helpers


def _terms_split(e: Expression, pred) -> tuple[Expression, Expression]:
    """Split the numerator of ``e`` by a predicate on exponent vectors."""
    ring = e.ring
    yes, no = {}, {}
    for exps, c in e.num.terms():
        (yes if pred(exps) else no)[exps] = c
    mk = lambda d: Expression.make(ring, ring.ctx.from_dict(d), e.den, e.rad)
    return mk(yes), mk(no)


def _deg(poly, i: int) -> int:
    return 0 if poly.is_constant() else poly.degrees()[i]


def _nonlinear_part(S: Expression, n: int) -> tuple[Expression, Expression]:
    """(linear, nonlinear) parts of S with respect to its top jet u_n."""
    ring = S.ring
    if _deg(S.den, ring.jet_index(n)):
        return Expression.constant(0, ring), S
    if S.rad is not None and S.rad.order == n:
        ri = ring.r_index
        nonlin, S = _terms_split(S, lambda ex: ex[ri] > 0)
    else:
        nonlin = Expression.constant(0, ring)
    j = ring.jet_index(n)
    hi, lo = _terms_split(S, lambda ex: ex[j] >= 2)
    return lo, nonlin + hi


def _lower_vars(k: int) -> list[tuple[str, Expression]]:
    """Coordinates below u_k with their total derivatives."""
    out = [("x", const(1))]
    out += [(f"u{j}", jet(j + 1)) for j in range(k)]
    return out


# ---------------------------------------------------------------------------
# one lowering step


class _LogObstruction(Exception):
    pass


def _log_dx(L: Expression, var: str, dvar: Expression, k: int) -> Expression:
    """D_x of Λ = ∫ L d(var), with var depending on x only through u_k-level data.

    Requires constant residues: every ∂_v L must integrate without a log part.
    """
    out = L * dvar
    for name, dv in _lower_vars(k):
        Lv = partial(L, name)
        if Lv.is_zero():
            continue
        Hv, rest = integrate(Lv, var)
        if not rest.is_zero():
            raise _LogObstruction(name)
        out = out + dv * Hv
    return out


def _step_plain(A: Expression, k: int) -> tuple[Expression, LogTerm | None]:
    var = f"u{k}"
    Q, L = integrate(A, var)
    if L.is_zero():
        return Q, None
    dx = _log_dx(L, var, jet(k + 1), k)
    return Q, LogTerm(L, var, dx)


def _step_radical(A: Expression, k: int, rad: RadicalContext) -> tuple[Expression, LogTerm | None]:
    """Integrate in u_k when the radicand R = c*u_k + q is linear in u_k: u_k = (s^m - q)/c."""
    R = rad.radicand
    c = jet_partial(R, k)
    if c.is_zero() or not jet_partial(c, k).is_zero() or c.rad is not None:
        raise UnsupportedShape(f"radicand is not linear in u{k}")
    q = R - c * jet(k)
    m = rad.m
    ring = A.ring
    s = _internal_s(ring)
    yk = (s ** m - q) / c
    As = compose(A, {f"u{k}": yk, "r": s}) * (s ** (m - 1)) * m / c
    Qs, Ls = integrate(As, _S)
    rgen = radical_generator(rad)
    back = {_S: rgen}
    Q = compose(Qs, back) if not Qs.is_zero() else Qs
    if Ls.is_zero():
        return Q, None
    dxs = _log_dx(Ls, _S, Expression.constant(0, ring), k)
    # the s-direction contributes Ls * D_x s with s = r
    dx = compose(dxs, back) + compose(Ls, back) * total_x(rgen)
    return Q, LogTerm(compose(Ls, back), f"r[u{k}]", dx)


def _step(S: Expression, n: int) -> tuple[Expression, LogTerm | None]:
    A = jet_partial(S, n)
    k = n - 1
    if A.rad is not None and A.rad.order == k:
        return _step_radical(A, k, A.rad)
    return _step_plain(A, k)


def _x_part(S: Expression) -> tuple[Expression, Expression]:
    """(u-free part, u-dependent part) of an order-0 expression."""
    ring = S.ring
    if _deg(S.den, ring.jet_index(0)):
        return Expression.constant(0, ring), S
    ui = ring.jet_index(0)
    ri = ring.r_index
    rad_dep = S.rad is not None and S.rad.order >= 0
    dep, free = _terms_split(S, lambda ex: ex[ui] > 0 or (rad_dep and ex[ri] > 0))
    return free, dep


def _integrate_x(S: Expression) -> tuple[Expression, LogTerm | None]:
    Q, L = integrate(S, "x")
    if L.is_zero():
        return Q, None
    return Q, LogTerm(L, "x", L)


def _lower(S: Expression, collect: bool):
    """Run the lowering.  Returns (result, obstruction parts)."""
    zero = Expression.constant(0, S.ring)
    flux = zero
    logs: list[LogTerm] = []
    parts: list[Expression] = []
    while not S.is_zero():
        n = S.order
        if n <= 0:
            if n == 0:
                S, dep = _x_part(S)
                if not dep.is_zero():
                    if not collect:
                        return ExactnessResult("not-exact", residue=S + dep, failing_order=0), parts
                    parts.append(dep)
                if S.is_zero():
                    break
            Q, lt = _integrate_x(S)
            flux = flux + Q
            if lt is not None:
                logs.append(lt)
            S = zero
            break
        lin, nonlin = _nonlinear_part(S, n)
        if not nonlin.is_zero():
            if not collect:
                return ExactnessResult("not-exact", residue=S, failing_order=n), parts
            parts.append(nonlin)
            S = lin
            continue
        try:
            Q, lt = _step(S, n)
        except _LogObstruction:
            if not collect:
                return ExactnessResult("not-exact", residue=S, failing_order=n), parts
            parts.append(S)
            S = zero
            break
        S = S - total_x(Q)
        if lt is not None:
            S = S - lt.dx
            logs.append(lt)
        flux = flux + Q
        if not S.is_zero() and S.order >= n:
            raise ExpressionError(f"order lowering stalled at u{n}")
    if parts:
        residue = reduce(lambda a, b: a + b, parts)
        return ExactnessResult("not-exact", residue=residue,
                               failing_order=max(p.order for p in parts), log_terms=logs), parts
    return ExactnessResult("exact", flux=flux, log_terms=logs), parts


def is_exact(S: Expression) -> ExactnessResult:
    """Decide S ∈ Im D_x; on success ``total_x(flux) + Σ log dx == S``."""
    return _lower(S, collect=False)[0]


# ---------------------------------------------------------------------------
# parameter constraints


def _primitive(coeffs: dict) -> dict:
    """Scale a {monomial: Fraction} map to coprime integers with positive leading term."""
    den = reduce(lcm, (c.denominator for c in coeffs.values()), 1)
    ints = {k: int(c * den) for k, c in coeffs.items()}
    g = reduce(gcd, (abs(v) for v in ints.values()), 0)
    lead = max(ints)
    sign = -1 if ints[lead] < 0 else 1
    return {k: sign * v // g for k, v in ints.items()}


def _coefficients(part: Expression) -> list[Expression]:
    """Parameter-polynomial coefficients of the jet/x/radical monomials of ``part``'s numerator."""
    ring = part.ring
    pidx = [ring.param_index(p) for p in ring.params]
    groups: dict[tuple, dict] = {}
    for exps, c in part.num.terms():
        key = tuple(int(e) for i, e in enumerate(exps) if i not in pidx)
        pm = tuple(int(exps[i]) for i in pidx)
        groups.setdefault(key, {})[pm] = _to_fraction(c)
    out = []
    for coeffs in groups.values():
        prim = _primitive(coeffs)
        d = {}
        for pm, v in prim.items():
            full = [0] * len(ring.names)
            for i, e in zip(pidx, pm):
                full[i] = e
            d[tuple(full)] = v
        out.append(Expression.make(ring, ring.ctx.from_dict(d)))
    return out


def _canonical_constraints(polys: Iterable[Expression]) -> list[Expression]:
    seen = {}
    for p in polys:
        if p.is_zero():
            continue
        seen.setdefault(to_text(p), p)
    return [seen[k] for k in sorted(seen, key=lambda t: (len(t), t))]


def obstruction_parts(S: Expression) -> list[Expression]:
    """The pieces of S that block exactness (empty iff S is exact)."""
    res, parts = _lower(S, collect=True)
    return parts


def extract_constraints(S: Expression, params: Sequence[str] = ()) -> Obstruction:
    """Polynomial conditions on the parameters under which S ∈ Im D_x."""
    if params:
        S = S.with_params(params)
    res, parts = _lower(S, collect=True)
    if not parts:
        return Obstruction(Expression.constant(0, S.ring), [])
    polys = []
    for p in parts:
        polys.extend(_coefficients(p))
    return Obstruction(res.residue, _canonical_constraints(polys))


# ---------------------------------------------------------------------------
# ideal membership


def _to_sympy(e: Expression, symbols: dict):
    import sympy

    if not e.den.is_constant() or e.rad is not None:
        raise ExpressionError("constraint is not a polynomial in the parameters")
    ring = e.ring
    total = sympy.Integer(0)
    for exps, c in e.num.terms():
        q = _to_fraction(c)
        term = sympy.Rational(q.numerator, q.denominator)
        for i, k in enumerate(exps):
            k = int(k)
            if not k:
                continue
            name = ring.names[i]
            if not name.startswith("p_"):
                raise ExpressionError(f"constraint depends on {name}")
            term *= symbols[name[2:]] ** k
        total += term
    return total


def ideal_contains(constraints: Sequence[Expression], target: Expression,
                   params: Sequence[str], radical: bool = False) -> bool:
    """Whether ``target`` lies in the ideal (or its radical) generated by ``constraints``."""
    import sympy

    names = list(params)
    syms = {p: sympy.Symbol(p) for p in names}
    gens = [_to_sympy(c, syms) for c in constraints]
    f = _to_sympy(target, syms)
    if f == 0:
        return True
    if not gens:
        return False
    variables = [syms[p] for p in names]
    if not radical:
        G = sympy.groebner(gens, *variables, order="grevlex", domain="QQ")
        return G.contains(f)
    t = sympy.Symbol("_rabinowitsch")
    G = sympy.groebner(gens + [1 - t * f], *variables, t, order="grevlex", domain="QQ")
    return G.exprs == [1]

"""Differential operators on the jet ring."""

from __future__ import annotations

from dataclasses import dataclass, field

from .expr import MAX_JET_ORDER, Expression, JetOrderError, Ring, _R


def _r_part_needed(e: Expression, var_index: int) -> bool:
    if e.rad is None:
        return False
    R = e.rad.poly(e.ring)
    return not R.is_constant() and R.degrees()[var_index] > 0


def _combine(e: Expression, dnum, dden, dR) -> Expression:
    """Assemble d(N/D) from dN (r held fixed), dD and dR (derivative of radicand).

    With r**m = R, dr = r*dR/(m*R).
    """
    ring = e.ring
    N, D = e.num, e.den
    base = dnum * D - N * dden if not dden.is_zero() else dnum * D
    if dR is None or dR.is_zero():
        if D.is_one():
            return Expression.make(ring, dnum, None, e.rad)
        return Expression.make(ring, base, D * D, e.rad)
    m = e.rad.m
    R = e.rad.poly(ring)
    r_index = ring.r_index
    Nr = N.derivative(r_index)
    r = ring.gen(_R)
    num = base * (R * m) + r * Nr * dR * D
    return Expression.make(ring, num, D * D * R * m, e.rad)


def partial(e: Expression, name: str) -> Expression:
    """Partial derivative in one coordinate (``x``, ``u0``.., or a parameter name)."""
    ring = e.ring
    if name == "u":
        name = "u0"
    key = name if name in ring.index else f"p_{name}"
    if key not in ring.index:
        return Expression.constant(0, ring)
    i = ring.index[key]
    dn = e.num.derivative(i) if not e.num.is_constant() else ring.zero()
    dd = e.den.derivative(i) if not e.den.is_constant() else ring.zero()
    dR = None
    if _r_part_needed(e, i):
        dR = e.rad.poly(ring).derivative(i)
    if dn.is_zero() and dd.is_zero() and dR is None:
        return Expression.constant(0, ring)
    return _combine(e, dn, dd, dR)


def jet_partial(e: Expression, i: int) -> Expression:
    """∂e/∂u_i with the jets treated as independent coordinates."""
    if i > MAX_JET_ORDER:
        return Expression.constant(0, e.ring)
    return partial(e, f"u{i}")


def _dx_poly(p, ring: Ring):
    """Total derivative of a polynomial, r held fixed."""
    if p.is_constant():
        return ring.zero()
    degs = p.degrees()
    out = ring.zero()
    xi = ring.x_index
    if degs[xi]:
        out = p.derivative(xi)
    start = ring.nparams + 2
    for pos in range(start, start + MAX_JET_ORDER + 1):
        if degs[pos]:
            k = MAX_JET_ORDER - (pos - start)
            if k + 1 > MAX_JET_ORDER:
                raise JetOrderError(f"total derivative needs u{k + 1}, beyond the cap {MAX_JET_ORDER}")
            out += p.derivative(pos) * ring.gen(f"u{k + 1}")
    return out


def total_x(e: Expression) -> Expression:
    """D_x = ∂_x + Σ u_{i+1} ∂_{u_i}, radical included via D_x r = r D_x R / (m R)."""
    ring = e.ring
    dn = _dx_poly(e.num, ring)
    dd = _dx_poly(e.den, ring)
    dR = None
    if e.rad is not None:
        dR = _dx_poly(e.rad.poly(ring), ring)
    if e.rad is None and e.den.is_one():
        return Expression(ring, dn, ring.one(), None) if not dn.is_zero() else Expression.constant(0, ring)
    return _combine(e, dn, dd, dR)


def total_x_n(e: Expression, n: int) -> Expression:
    for _ in range(n):
        e = total_x(e)
    return e


def euler(H: Expression) -> Expression:
    """Variational derivative Σ_i (-D_x)^i ∂H/∂u_i."""
    n = H.order
    # Horner form: P_0 - D_x(P_1 - D_x(P_2 - ...))
    acc = Expression.constant(0, H.ring)
    for i in range(n, -1, -1):
        acc = jet_partial(H, i) - total_x(acc)
    return acc


def frechet(F: Expression, G: Expression) -> Expression:
    """Linearisation F_*[G] = Σ_i ∂F/∂u_i · D_x^i G."""
    n = F.order
    out = Expression.constant(0, F.ring)
    dG = G
    for i in range(0, n + 1):
        if i:
            dG = total_x(dG)
        Fi = jet_partial(F, i)
        if not Fi.is_zero():
            out = out + Fi * dG
    return out


def dt_along(F, e: Expression) -> Expression:
    """Time derivative of ``e`` along u_t = F (accepts a Flow or an Expression)."""
    flow = F if isinstance(F, Flow) else Flow(F)
    n = e.order
    out = Expression.constant(0, e.ring)
    for i in range(0, n + 1):
        ei = jet_partial(e, i)
        if not ei.is_zero():
            out = out + flow.dx(i) * ei
    return out


@dataclass(eq=False)
class Flow:
    """Right-hand side of u_t = F with memoised x-derivatives."""

    rhs: Expression
    name: str = ""
    _dx: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if not self._dx:
            self._dx = [self.rhs]

    @property
    def order(self) -> int:
        return self.rhs.order

    def dx(self, i: int) -> Expression:
        while len(self._dx) <= i:
            self._dx.append(total_x(self._dx[-1]))
        return self._dx[i]

    def coefficient(self, i: int) -> Expression:
        """F_i = ∂F/∂u_i."""
        return jet_partial(self.rhs, i)

    def scaled(self, c) -> "Flow":
        return Flow(self.rhs * c, self.name)

    def __str__(self) -> str:
        return f"u_t = {self.rhs}"

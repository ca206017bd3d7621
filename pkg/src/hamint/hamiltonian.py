"""Hamiltonians, their flows, and the transformations that preserve the form u_t = D_x(δH/δu).

Point transformations x = φ(y, v), u = ψ(y, v) are written with the new
variables in the old slots: ``x`` plays y and ``u`` plays v.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .calculus import Flow, euler, partial, total_x
from .expr import Expression, ExpressionError, compose, const, jet, x_var


class TransformError(ExpressionError):
    """A transformation's precondition does not hold."""


@dataclass(frozen=True)
class HamiltonianValue:
    """H(x, u, u_x, u_xx); ``conformal`` is f for the form v_t = f D_y(f δH/δv)."""

    H: Expression
    conformal: Expression | None = None

    def __post_init__(self):
        if self.H.order > 2:
            raise ExpressionError(f"Hamiltonian has jet order {self.H.order}, at most 2 allowed")

    @property
    def canonical(self) -> bool:
        return self.conformal is None

    def __str__(self) -> str:
        return str(self.H)


def _as_value(H) -> HamiltonianValue:
    return H if isinstance(H, HamiltonianValue) else HamiltonianValue(H)


def flow_of(H, allow_conformal: bool = False) -> Flow:
    """u_t = D_x(δH/δu), or f D_x(f δH/δu) for a conformally tagged Hamiltonian."""
    hv = _as_value(H)
    E = euler(hv.H)
    if E.is_zero():
        raise ExpressionError("Hamiltonian is trivial: its variational derivative vanishes")
    if hv.conformal is None:
        return Flow(total_x(E))
    if not allow_conformal:
        raise TransformError("conformally tagged Hamiltonian; pass allow_conformal=True")
    f = hv.conformal
    return Flow(f * total_x(f * E))


# ---------------------------------------------------------------------------
# point transformations


@dataclass(frozen=True)
class PointTransformation:
    phi: Expression
    psi: Expression

    def __post_init__(self):
        for name, e in (("phi", self.phi), ("psi", self.psi)):
            if not e.is_polynomial() or e.rad is not None or e.order > 0:
                raise TransformError(f"{name} must be a polynomial in y and v")
            if e.num.total_degree() > 4:
                raise TransformError(f"{name} has total degree above 4")

    @property
    def delta(self) -> Expression:
        """Δ = φ_y ψ_v − φ_v ψ_y."""
        return (partial(self.phi, "x") * partial(self.psi, "u")
                - partial(self.phi, "u") * partial(self.psi, "x"))

    @property
    def canonical(self) -> bool:
        return self.delta == const(1)

    def prolong(self, order: int) -> list[Expression]:
        """u, u_x, ..., u_order expressed through v and its y-derivatives."""
        dphi = total_x(self.phi)
        jets = [self.psi]
        for _ in range(order):
            jets.append(total_x(jets[-1]) / dphi)
        return jets

    def substitute(self, e: Expression) -> Expression:
        """e(x, u, u_x, ...) pulled back to (y, v, v_y, ...)."""
        jets = self.prolong(max(e.order, 0))
        mapping = {"x": self.phi}
        mapping.update({f"u{i}": j for i, j in enumerate(jets)})
        return compose(e, mapping)


def transform_point(H, T: PointTransformation) -> HamiltonianValue:
    """H̃ = H(φ, ψ, D_yψ/D_yφ, ...)·D_yφ, tagged with f = 1/Δ when Δ ≠ 1."""
    hv = _as_value(H)
    if hv.conformal is not None:
        raise TransformError("cannot transform an already tagged Hamiltonian")
    delta = T.delta
    if delta.is_zero():
        raise TransformError("transformation is not invertible (Δ = 0)")
    Ht = T.substitute(hv.H) * total_x(T.phi)
    return HamiltonianValue(Ht, None if delta == const(1) else delta.inverse())


def pushforward_flow(F: Flow, T: PointTransformation) -> Expression:
    """The flow v_t induced by u_t = F under x = φ(y,v), u = ψ(y,v)."""
    ux = total_x(T.psi) / total_x(T.phi)
    denom = partial(T.psi, "u") - ux * partial(T.phi, "u")
    return T.substitute(F.rhs) / denom


# ---------------------------------------------------------------------------
# special transformations


def _scalar(c) -> Expression:
    return c if isinstance(c, Expression) else Expression.constant(Fraction(c))


def transform_dilate(H, alpha, beta, gamma) -> HamiltonianValue:
    """t = α t̃, x = β y, u = γ v:  H̃ = α/(βγ²)·H(βy, γv, (γ/β)v_y, (γ/β²)v_yy)."""
    hv = _as_value(H)
    a, b, g = (_scalar(s) for s in (alpha, beta, gamma))
    if any(s.is_zero() for s in (a, b, g)):
        raise TransformError("dilatation scales must be nonzero")
    mapping = {"x": b * x_var()}
    for i in range(max(hv.H.order, 0) + 1):
        mapping[f"u{i}"] = g / b ** i * jet(i)
    Ht = compose(hv.H, mapping) * a / (b * g * g)
    return HamiltonianValue(Ht, hv.conformal)


def transform_galilean(H, c) -> HamiltonianValue:
    """y = x + ct: H̃ = H − ½c v² (H must not depend on x)."""
    hv = _as_value(H)
    if hv.H.depends_on_x():
        raise TransformError("precondition: the Galilean transformation needs an x-independent H")
    c = _scalar(c)
    return HamiltonianValue(hv.H - c * jet(0) ** 2 / 2, hv.conformal)


def transform_shift(H, kind: str, constants: Sequence) -> HamiltonianValue:
    """Remove the x-dependent linear term of H = h + c x u or h + (c1 x² + c2 x) u.

    ``h`` must be free of x and u.  The time-dependent change of variables
    u → u + c t (resp. u → u + 2 c1 x t + c2 t) is implied, not represented.
    """
    hv = _as_value(H)
    x = x_var()
    if kind == "linear-in-x":
        (c,) = (_scalar(k) for k in constants)
        term = c * x * jet(0)
    elif kind == "quadratic-in-x":
        c1, c2 = (_scalar(k) for k in constants)
        term = (c1 * x * x + c2 * x) * jet(0)
    else:
        raise TransformError(f"unknown shift kind {kind!r}")
    h = hv.H - term
    if h.depends_on_x() or h.depends_on_jet(0):
        raise TransformError(f"precondition: H is not of the {kind} shift shape")
    return HamiltonianValue(h, hv.conformal)


def equivalent(H1, H2) -> tuple[bool, Fraction | None]:
    """H2 ≡ H1 + D_x f + λu; returns (True, λ) or (False, None)."""
    E = euler(_as_value(H2).H - _as_value(H1).H)
    if E.is_constant():
        return True, E.constant_value()
    return False, None

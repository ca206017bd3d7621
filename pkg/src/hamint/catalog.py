"""Concrete Hamiltonians, flows and parametric families.

File entries live in ``catalog_data`` (one expression per file) and are
described by ``manifest.ini``.  Families with polynomial slots are built by
the ``family_*`` constructors below.
"""

from __future__ import annotations

import configparser
import random
from itertools import product
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Callable, Mapping

from .calculus import Flow, euler, partial, total_x
from .expr import Expression, ExpressionError, compose, jet, param, radical, ring_for, x_var
from .hamiltonian import HamiltonianValue, flow_of
from .parsing import parse, parse_document, to_text

STATUSES = ("integrable", "non-integrable", "family", "flow")


class CatalogError(ExpressionError):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    kind: str  # "ham", "flow" or "dens"
    expr: Expression
    status: str
    params: tuple[str, ...] = ()
    bindings: Mapping[str, object] = field(default_factory=dict)
    check_n: int | None = None
    fail_by: int | None = None
    about: str = ""
    partners: tuple[str, ...] = ()

    @property
    def hamiltonian(self) -> HamiltonianValue | None:
        return HamiltonianValue(self.expr) if self.kind == "ham" else None

    @property
    def flow(self) -> Flow:
        if self.kind == "ham":
            return Flow(flow_of(self.expr).rhs, self.id)
        if self.kind == "dens":
            return Flow(total_x(euler(self.expr)), self.id)
        return Flow(self.expr, self.id)

    @property
    def symbolic(self) -> bool:
        return bool(self.params)


# ---------------------------------------------------------------------------
# slot values


def _num(v) -> Expression:
    if isinstance(v, Expression):
        return v
    if isinstance(v, str):
        return parse(v)
    return Expression.constant(Fraction(v))


def _poly(v, var: str, max_deg: int, what: str) -> Expression:
    e = _num(v)
    other = "u" if var == "x" else "x"
    ok = (e.is_polynomial() and e.rad is None and e.order <= 0 and not e.free_params()
          and not (e.depends_on_x() if other == "x" else e.depends_on_jet(0)))
    if not ok:
        raise CatalogError(f"{what} must be a polynomial in {var} with rational coefficients")
    idx = e.ring.x_index if var == "x" else e.ring.jet_index(0)
    deg = 0 if e.num.is_constant() else int(e.num.degrees()[idx])
    if deg > max_deg:
        raise CatalogError(f"{what} has degree {deg} in {var}, at most {max_deg} allowed")
    return e


def _du(e: Expression, k: int = 1) -> Expression:
    for _ in range(k):
        e = partial(e, "u")
    return e


def _dx(e: Expression, k: int = 1) -> Expression:
    for _ in range(k):
        e = partial(e, "x")
    return e


# ---------------------------------------------------------------------------
# families


def family_b2a(q, c0=0) -> HamiltonianValue:
    """Square-root family with a = sqrt(u_x + q(u)), deg q <= 4."""
    q = _poly(q, "u", 4, "q")
    c0 = _num(c0)
    q1, q2 = _du(q), _du(q, 2)
    R = jet(1) + q
    a = radical(R, 1, 2)
    am1, am3, am5 = radical(R, -1, 2), radical(R, -3, 2), radical(R, -5, 2)
    H = (jet(2) ** 2 * am5 / 2 + Fraction(10, 3) * a * (q2 + c0) - (q * q1) ** 2 * am5 / 2
         + (2 * q * q * q2 + 5 * q * q1 ** 2) * am3 / 3
         + Fraction(5, 6) * am1 * (q1 ** 2 - 8 * q * q2))
    return HamiltonianValue(H)


def b2a_partner(q) -> Flow:
    q = _poly(q, "u", 4, "q")
    R = jet(1) + q
    am1, am3 = radical(R, -1, 2), radical(R, -3, 2)
    return Flow(total_x(jet(2) * am3 + _du(q) * (3 * am1 - q * am3)), "b2a-partner")


_U5 = jet(2) ** 2 / (2 * jet(0) ** 5) - Fraction(15, 8) * jet(1) ** 4 / jet(0) ** 7


def family_b12(s2) -> HamiltonianValue:
    """Rational family over u^5 with s2(x) of degree <= 4."""
    s2 = _poly(s2, "x", 4, "s2")
    u, u1 = jet(0), jet(1)
    return HamiltonianValue(_U5 + s2 * u1 ** 2 / (2 * u) + s2 ** 2 * u ** 5 / 50 - u * _dx(s2, 2) / 3)


def family_b12_h1(k, s3) -> HamiltonianValue:
    """The s2 = k*s3^2 branch with s3 = c0 + c1 x + c2 x^2."""
    k = _num(k)
    s3 = _poly(s3, "x", 2, "s3")
    u, u1 = jet(0), jet(1)
    H = (_U5 + s3 ** 2 * k * u1 ** 2 / (2 * u) + k ** 2 * s3 ** 4 * u ** 5 / 50 - s3 * u ** 2 / 2
         - Fraction(2, 3) * k * u * (s3 * _dx(s3, 2) + _dx(s3) ** 2))
    return HamiltonianValue(H)


def _b12_partner(P: Expression, name: str) -> Flow:
    u, u1, u2 = jet(0), jet(1), jet(2)
    return Flow(total_x(u2 / u ** 3 - Fraction(3, 2) * u1 ** 2 / u ** 4 + u ** 2 * P), name)


def b12_partner(s2) -> Flow:
    return _b12_partner(-Fraction(3, 5) * _poly(s2, "x", 4, "s2"), "b12-partner")


def b12_h1_partner(k, s3) -> Flow:
    s3 = _poly(s3, "x", 2, "s3")
    return _b12_partner(-Fraction(3, 5) * _num(k) * s3 ** 2, "b12-h1-partner")


def _b13_args(k1, k2, k3, z):
    k1, k2, k3, z = (_num(v) for v in (k1, k2, k3, z))
    if z.is_zero():
        raise CatalogError("z must be nonzero")
    return k1, k2, k3, z, jet(0) ** 2 + z


def family_b13(k1, k2, k3, z) -> HamiltonianValue:
    """Family over mu = u^2 + z, z != 0."""
    k1, k2, k3, z, mu = _b13_args(k1, k2, k3, z)
    u, u1, u2 = jet(0), jet(1), jet(2)
    phi = -z * (2 * k1 * u + k2) / mu ** 5 + (k1 * u + k2) / mu ** 4 + k3 / mu ** 3
    psi = (z / 2 * (4 * k1 ** 2 * z - 4 * k1 * k2 * u - k2 ** 2) / mu ** 3
           + (3 * k1 * k2 * u - 4 * k1 ** 2 * z + k2 ** 2) / mu ** 2
           + Fraction(5, 2) * (4 * k1 * k3 * u + 2 * k2 * k3 + k1 ** 2) / mu)
    H = (u2 ** 2 / (2 * mu ** 5) - Fraction(5, 6) * u1 ** 4 / mu ** 7 * (8 * mu - 9 * z)
         + 5 * phi * u1 ** 2 + psi)
    return HamiltonianValue(H)


def b13_partner(k1, k2, k3, z) -> Flow:
    k1, k2, _k3, z, mu = _b13_args(k1, k2, k3, z)
    u, u1, u2 = jet(0), jet(1), jet(2)
    G = u2 / mu ** 3 - 3 * u * u1 ** 2 / mu ** 4 + (k2 * u - 2 * z * k1) / mu ** 2 + k1 / mu
    return Flow(total_x(G), "b13-partner")


# third-order types


def third_order_a0(P, Q) -> HamiltonianValue:
    """H = -u_x^2/(2Q^3) + P/Q with deg P <= 4, deg Q <= 2 (polynomials in u)."""
    P = _poly(P, "u", 4, "P")
    Q = _poly(Q, "u", 2, "Q")
    if Q.is_zero():
        raise CatalogError("Q must be nonzero")
    return HamiltonianValue(-jet(1) ** 2 / (2 * Q ** 3) + P / Q)


def third_order_a22(P) -> HamiltonianValue:
    """H = -u_x^2/(2u^3) + P(x) u^3/3 with deg P <= 4."""
    P = _poly(P, "x", 4, "P")
    return HamiltonianValue(-jet(1) ** 2 / (2 * jet(0) ** 3) + P * jet(0) ** 3 / 3)


def third_order_c1(P) -> HamiltonianValue:
    """H = sqrt(u_x + P(u)) with deg P <= 4."""
    P = _poly(P, "u", 4, "P")
    return HamiltonianValue(radical(jet(1) + P, 1, 2))


def third_order_flows(P_u="u^4 - u^2 + 2", Q="u^2 + 1", P_x="x^3 + 2*x - 1") -> list[Flow]:
    """Named third-order flows: the three general types plus the printed partners."""
    out = [
        Flow(flow_of(third_order_a0("u^3", 1)).rhs, "kdv"),
        Flow(flow_of(third_order_a0("-1/2*u^4", 1)).rhs, "mkdv"),
        Flow(flow_of(third_order_a0(P_u, Q)).rhs, "type-a0"),
        Flow(flow_of(third_order_a22(P_x)).rhs, "type-a22"),
        Flow(flow_of(third_order_c1(P_u)).rhs, "type-c1"),
        b12_partner(P_x),
        b13_partner(1, 2, 3, 1),
        b2a_partner("u"),
    ]
    for eid in ("b13a-h1-partner", "b13a-h2-partner", "b13a-h3-partner"):
        out.append(get(eid).flow)
    return out


# slot kinds: "num" (rational), ("u", d) / ("x", d) polynomial of degree <= d
_FAMILIES: dict[str, tuple[Callable, dict, str]] = {
    "b2a": (family_b2a, {"q": ("u", 4), "c0": "num"}, "ham"),
    "b2a_partner": (b2a_partner, {"q": ("u", 4)}, "flow"),
    "b12": (family_b12, {"s2": ("x", 4)}, "ham"),
    "b12_partner": (b12_partner, {"s2": ("x", 4)}, "flow"),
    "b12_h1": (family_b12_h1, {"k": "num", "s3": ("x", 2)}, "ham"),
    "b12_h1_partner": (b12_h1_partner, {"k": "num", "s3": ("x", 2)}, "flow"),
    "b13": (family_b13, {"k1": "num", "k2": "num", "k3": "num", "z": "num"}, "ham"),
    "b13_partner": (b13_partner, {"k1": "num", "k2": "num", "k3": "num", "z": "num"}, "flow"),
}


# ---------------------------------------------------------------------------
# manifest


@dataclass(frozen=True)
class _Spec:
    id: str
    file: str | None
    family: str | None
    slots: dict[str, str | None]
    status: str
    check_n: int | None
    fail_by: int | None
    about: str
    partners: tuple[str, ...]
    admissible: dict[str, tuple[str, ...]]


def _pairs(text: str) -> dict[str, str | None]:
    out: dict[str, str | None] = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        name, _, value = item.partition("=")
        out[name.strip()] = value.strip() or None
    return out


@lru_cache(maxsize=None)
def _manifest() -> dict[str, _Spec]:
    cp = configparser.ConfigParser(interpolation=None)
    cp.read_string(resources.files("hamint").joinpath("catalog_data/manifest.ini").read_text())
    specs = {}
    for eid in cp.sections():
        s = cp[eid]
        status = s.get("status")
        if status not in STATUSES:
            raise CatalogError(f"{eid}: bad status {status!r}")
        specs[eid] = _Spec(
            eid, s.get("file"), s.get("family"), _pairs(s.get("slots", "")), status,
            s.getint("check"), s.getint("fail_by"), s.get("about", ""),
            tuple(p.strip() for p in s.get("partners", "").split(",") if p.strip()),
            {k: tuple(v.split("|")) for k, v in _pairs(s.get("admissible", "")).items() if v},
        )
    return specs


@lru_cache(maxsize=None)
def _load_file(name: str) -> tuple[Expression, tuple[str, ...]]:
    text = resources.files("hamint").joinpath(f"catalog_data/{name}").read_text()
    return parse_document(text)


def ids() -> list[str]:
    return list(_manifest())


def describe(eid: str) -> _Spec:
    try:
        return _manifest()[eid]
    except KeyError:
        raise CatalogError(f"unknown catalog id {eid!r}") from None


def bind_params(e: Expression, values: Mapping[str, Expression]) -> Expression:
    """Substitute values for parameters and drop them from the ring."""
    if not values:
        return e
    out = compose(e, dict(values))
    left = tuple(p for p in out.ring.params if p in out.free_params())
    return out.in_ring(ring_for(left)) if left != out.ring.params else out


def get(eid: str, bindings: Mapping[str, object] | None = None, *, keep: tuple[str, ...] = (),
        **kw) -> CatalogEntry:
    """Instantiate a catalog entry.

    Slot values come from ``bindings``/keywords, then from manifest defaults.
    Slots named in ``keep`` stay symbolic (numeric slots only).
    """
    spec = describe(eid)
    given = dict(bindings or {}, **kw)
    unknown = set(given) - set(spec.slots)
    if unknown:
        raise CatalogError(f"{eid}: unknown slot(s) {', '.join(sorted(unknown))}")
    values: dict[str, object] = {}
    for name, default in spec.slots.items():
        if name in keep:
            continue
        v = given.get(name, default)
        if v is None:
            raise CatalogError(f"{eid}: slot {name!r} is unbound")
        allowed = spec.admissible.get(name)
        if allowed and _num(v) not in [_num(a) for a in allowed]:
            raise CatalogError(f"{eid}: slot {name!r} admits {', '.join(allowed)}")
        values[name] = v
    if spec.file:
        expr, declared = _load_file(spec.file)
        kind = spec.file.rsplit(".", 1)[1]
        nums = {k: _num(v) for k, v in values.items()}
        for k, v in nums.items():
            if not v.is_rational_constant():
                raise CatalogError(f"{eid}: slot {k!r} needs a rational value")
        expr = bind_params(expr, nums)
        if set(expr.free_params()) - set(keep):
            raise CatalogError(f"{eid}: parameters {sorted(expr.free_params())} left unbound")
    else:
        ctor, kinds, kind = _FAMILIES[spec.family]
        args = {}
        for name, slot_kind in kinds.items():
            if name in keep:
                if slot_kind != "num":
                    raise CatalogError(f"{eid}: polynomial slot {name!r} cannot stay symbolic")
                args[name] = param(name)
            else:
                args[name] = values[name]
        built = ctor(**args)
        expr = built.H if isinstance(built, HamiltonianValue) else built.rhs
    return CatalogEntry(eid, kind, expr, spec.status, tuple(keep), values, spec.check_n,
                        spec.fail_by, spec.about, spec.partners)


def list_entries() -> list[tuple[str, str, str]]:
    """(id, status, description) for every entry, in manifest order."""
    return [(s.id, s.status, s.about) for s in _manifest().values()]


# ---------------------------------------------------------------------------
# random instances


def _rand_q(rng: random.Random, nonzero: bool = False) -> Fraction:
    while True:
        q = Fraction(rng.randint(-9, 9), rng.randint(1, 6))
        if q or not nonzero:
            return q


def _rand_poly(rng: random.Random, var: str, deg: int) -> str:
    g = x_var() if var == "x" else jet(0)
    p = sum((_rand_q(rng) * g ** i for i in range(deg)), _rand_q(rng, nonzero=True) * g ** deg)
    return to_text(p)


def random_bindings(eid: str, seed: int = 0, draws: int = 3) -> list[dict[str, str]]:
    """Pseudo-random rational slot values for an entry, reproducible from ``seed``."""
    spec = describe(eid)
    rng = random.Random(f"{eid}:{seed}")
    kinds = _FAMILIES[spec.family][1] if spec.family else {k: "num" for k in spec.slots}
    out = []
    for _ in range(draws):
        b = {}
        for name, kind in kinds.items():
            if kind == "num":
                b[name] = str(_rand_q(rng, nonzero=True))
            else:
                b[name] = _rand_poly(rng, *kind)
        out.append(b)
    return out


def admissible_bindings(eid: str) -> list[dict[str, str]]:
    """All combinations of listed admissible values (empty if a required slot has none)."""
    spec = describe(eid)
    required = [k for k, d in spec.slots.items() if d is None]
    if not required or any(k not in spec.admissible for k in required):
        return []
    return [dict(zip(required, combo)) for combo in product(*(spec.admissible[k] for k in required))]


def partner_bindings(eid: str, binding: Mapping[str, object]) -> dict[str, object]:
    """Restrict a binding to the slots of a partner entry."""
    return {k: v for k, v in binding.items() if k in describe(eid).slots}


def expected_outcome(entry: CatalogEntry, first_failure: int | None, checked_to: int) -> str:
    """Empty string when a report agrees with the entry's status, else a discrepancy note."""
    if entry.status == "integrable" and first_failure is not None:
        return f"discrepancy: expected integrable, failed at n={first_failure}"
    if entry.status == "non-integrable":
        if first_failure is None:
            if checked_to >= (entry.fail_by or 11):
                return f"discrepancy: expected failure by n={entry.fail_by}, none found"
            return ""
        if entry.fail_by is not None and first_failure > entry.fail_by:
            return f"discrepancy: failed at n={first_failure}, expected by n={entry.fail_by}"
    return ""


__all__ = [
    "CatalogEntry", "CatalogError", "get", "ids", "describe", "list_entries", "random_bindings",
    "admissible_bindings", "bind_params",
    "partner_bindings", "expected_outcome", "family_b2a", "b2a_partner", "family_b12",
    "b12_partner", "family_b12_h1", "b12_h1_partner", "family_b13", "b13_partner",
    "third_order_a0", "third_order_a22", "third_order_c1", "third_order_flows",
]

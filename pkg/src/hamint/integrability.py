"""Integrability conditions D_t ρ_n ∈ Im D_x, symmetries, and reports."""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .calculus import Flow, dt_along, frechet, total_x
from .densities import DensityChain, MissingDensity, normalize_leading, recurrence_step
from .exactness import Obstruction, _canonical_constraints, _coefficients, _lower, is_exact
from .expr import Expression, ExpressionError, JetOrderError
from .parsing import to_text

PASS, FAIL, NOT_CHECKED = "pass", "fail", "not-checked"


def digest(e: Expression | None) -> str:
    if e is None:
        return "-"
    return hashlib.sha256(to_text(e).encode()).hexdigest()[:16]


@dataclass
class ConditionRecord:
    n: int
    verdict: str
    ms: int = 0
    digest: str = "-"
    residue: Expression | None = None
    flux: Expression | None = None
    note: str = ""
    constraints: list[Expression] = field(default_factory=list)


@dataclass
class ConditionReport:
    flow_id: str
    records: list[ConditionRecord]
    time_scale: Fraction = Fraction(1)
    rho_minus1: Expression | None = None
    chain: DensityChain | None = field(default=None, repr=False)

    @property
    def first_failure(self) -> int | None:
        for r in self.records:
            if r.verdict == FAIL:
                return r.n
        return None

    @property
    def all_pass(self) -> bool:
        return bool(self.records) and all(r.verdict == PASS for r in self.records)

    @property
    def constraints(self) -> Obstruction | None:
        polys = [c for r in self.records for c in r.constraints]
        residues = [r.residue for r in self.records if r.residue is not None]
        if not residues:
            return None
        total = residues[0]
        for e in residues[1:]:
            total = total + e
        return Obstruction(total, _canonical_constraints(polys))

    def verdict(self, n: int) -> str:
        for r in self.records:
            if r.n == n:
                return r.verdict
        return NOT_CHECKED

    def to_text(self) -> str:
        """Deterministic human-readable rendering (no timings)."""
        lines = [f"flow: {self.flow_id or '<anonymous>'}"]
        if self.rho_minus1 is not None:
            lines.append(f"rho[-1] = {to_text(self.rho_minus1)}")
        if self.time_scale != 1:
            lines.append(f"time scale: t -> t/({self.time_scale})")
        for r in self.records:
            line = f"condition n={r.n}: {r.verdict}"
            if r.verdict != NOT_CHECKED:
                line += f"  [{r.digest}]"
            if r.note:
                line += f"  ({r.note})"
            lines.append(line)
            for c in r.constraints:
                lines.append(f"  constraint: {to_text(c)} = 0")
        ff = self.first_failure
        lines.append("first failure: " + ("none" if ff is None else f"n={ff}"))
        return "\n".join(lines) + "\n"

    def to_machine(self) -> str:
        """Line-oriented key=value records, one per condition."""
        lines = []
        for r in self.records:
            fields = [f"flow={self.flow_id or '-'}", f"index={r.n}", f"verdict={r.verdict}",
                      f"digest={r.digest}", f"ms={r.ms}"]
            if r.constraints:
                fields.append(f"constraints={len(r.constraints)}")
            lines.append(" ".join(fields))
        return "\n".join(lines) + "\n"


def _density(chain: DensityChain, n: int) -> Expression:
    if n == -1:
        return chain.rho_m1
    rho = recurrence_step(chain, n - 4)
    chain.add(n, rho)
    return rho


def _run(F: Flow, max_n: int, *, parametric: bool, time_budget: float | None,
         flow_id: str, rho_m1: Expression | None) -> ConditionReport:
    if rho_m1 is None:
        lead = normalize_leading(F)
        F, rho_m1, scale = lead.flow, lead.rho, lead.time_scale
    else:
        scale = Fraction(1)
    chain = DensityChain.start(F, rho_m1)
    report = ConditionReport(flow_id, [], scale, rho_m1, chain)
    start = time.monotonic()
    halted = ""
    for n in range(-1, max_n + 1):
        if halted:
            report.records.append(ConditionRecord(n, NOT_CHECKED, note=halted))
            continue
        if time_budget is not None and time.monotonic() - start > time_budget:
            halted = "time budget exhausted"
            report.records.append(ConditionRecord(n, NOT_CHECKED, note=halted))
            continue
        t0 = time.monotonic()
        try:
            rho = _density(chain, n)
            D = dt_along(F, rho)
            res, parts = _lower(D, collect=parametric)
        except MissingDensity as exc:
            report.records.append(ConditionRecord(n, NOT_CHECKED, note=str(exc)))
            if not parametric:
                halted = str(exc)
            continue
        except JetOrderError as exc:
            halted = str(exc)
            report.records.append(ConditionRecord(n, NOT_CHECKED, note=halted))
            continue
        ms = int((time.monotonic() - t0) * 1000)
        entry = chain.entries[n]
        if res.exact:
            note = ""
            if res.log_terms:
                note = "flux has a logarithmic part"
            else:
                entry.theta = res.flux
            entry.status = PASS
            report.records.append(ConditionRecord(n, PASS, ms, digest(res.flux), flux=res.flux, note=note))
            continue
        entry.status = FAIL
        rec = ConditionRecord(n, FAIL, ms, digest(res.residue), residue=res.residue,
                              note=f"residue of order {res.failing_order}")
        if parametric:
            polys = []
            for p in parts:
                polys.extend(_coefficients(p))
            rec.constraints = _canonical_constraints(polys)
        else:
            halted = f"halted after failure at n={n}"
        report.records.append(rec)
    return report


def check_conditions(F, max_n: int, *, time_budget: float | None = None,
                     flow_id: str = "", rho_m1: Expression | None = None) -> ConditionReport:
    """Run conditions n = -1..max_n in order, halting at the first failure."""
    F = F if isinstance(F, Flow) else Flow(F)
    if not -1 <= max_n <= 11:
        raise ValueError("max_n must lie in [-1, 11]")
    return _run(F, max_n, parametric=False, time_budget=time_budget, flow_id=flow_id, rho_m1=rho_m1)


def check_conditions_parametric(F, max_n: int, params: Sequence[str] = (), *,
                                time_budget: float | None = None, flow_id: str = "") -> ConditionReport:
    """Like check_conditions but collects parameter constraints per failing condition.

    Constraints are not assumed when continuing; a condition whose density
    needs a missing flux is reported as not-checked.
    """
    F = F if isinstance(F, Flow) else Flow(F)
    if params:
        F = Flow(F.rhs.with_params(params), F.name)
    return _run(F, max_n, parametric=True, time_budget=time_budget, flow_id=flow_id, rho_m1=None)


def commutator(F: Expression, G: Expression) -> Expression:
    """[F, G] = F_*[G] − G_*[F]."""
    return frechet(F, G) - frechet(G, F)


def is_symmetry(F, G) -> tuple[bool, Expression]:
    F = F.rhs if isinstance(F, Flow) else F
    G = G.rhs if isinstance(G, Flow) else G
    c = commutator(F, G)
    return c.is_zero(), c


def flux_of_density(F, rho: Expression) -> Expression:
    """θ with D_x θ = D_t ρ."""
    res = is_exact(dt_along(F, rho))
    if not res.exact:
        raise ExpressionError("D_t rho is not a total derivative")
    if res.log_terms:
        raise ExpressionError("the flux has a logarithmic part")
    return res.flux


def verify_fluxes(report: ConditionReport) -> bool:
    """Recheck total_x(θ_n) = D_t ρ_n for every stored flux."""
    chain = report.chain
    for n, entry in chain.entries.items():
        if entry.theta is None:
            continue
        if total_x(entry.theta) != dt_along(chain.flow, entry.rho):
            return False
    return True

import random
from fractions import Fraction

import pytest

from hamint.calculus import Flow, dt_along, total_x
from hamint.catalog import get
from hamint.expr import eval_at, jet
from hamint.exactness import ideal_contains
from hamint.hamiltonian import flow_of
from hamint.integrability import (
    FAIL,
    NOT_CHECKED,
    PASS,
    check_conditions,
    check_conditions_parametric,
    commutator,
    flux_of_density,
    is_symmetry,
    verify_fluxes,
)
from hamint.parsing import parse

u = jet(0)


def test_linear_flow_passes():
    r = check_conditions(Flow(jet(5)), 5)
    assert r.all_pass
    assert [rec.n for rec in r.records] == list(range(-1, 6))


def test_eq9_through_three():
    r = check_conditions(get("eq9").flow, 3)
    assert r.all_pass
    assert verify_fluxes(r)


def test_negative_halts():
    r = check_conditions(get("neg-ninth").flow, 9)
    assert r.first_failure is not None and r.first_failure <= 9
    failing = [rec for rec in r.records if rec.verdict == FAIL][0]
    assert not failing.residue.is_zero()
    assert all(rec.verdict == NOT_CHECKED for rec in r.records if rec.n > failing.n)


def test_max_n_range():
    with pytest.raises(ValueError):
        check_conditions(Flow(jet(5)), 12)
    with pytest.raises(ValueError):
        check_conditions(Flow(jet(5)), -2)


def test_time_budget_marks_not_checked():
    r = check_conditions(get("eq8").flow, 5, time_budget=0.0)
    assert r.records[0].verdict in (PASS, NOT_CHECKED)
    assert r.records[-1].verdict == NOT_CHECKED
    assert "time budget" in r.records[-1].note


def test_report_rendering_is_deterministic():
    a = check_conditions(get("kdv5").flow, 3, flow_id="kdv5")
    b = check_conditions(get("kdv5").flow, 3, flow_id="kdv5")
    assert a.to_text() == b.to_text()
    lines = a.to_machine().splitlines()
    assert len(lines) == 5
    assert all(set(kv.split("=")[0] for kv in ln.split()) >= {"index", "verdict", "digest", "ms"}
               for ln in lines)


def test_parametric_without_parameters_is_empty():
    r = check_conditions_parametric(get("kdv5").flow, 3)
    assert r.all_pass and r.constraints is None


def test_constraint_soundness():
    # b13-general at n = 1: roots of the constraints make the residue vanish
    entry = get("b13-general", keep=("c1", "z"))
    r = check_conditions_parametric(entry.flow, 1, flow_id="b13-general")
    ob = r.constraints
    assert ob is not None and not ob.empty
    # c1 = -9 z / 8 is a common root
    rng = random.Random(3)
    for z in (Fraction(2), Fraction(-3, 5)):
        pt = {"c1": -Fraction(9, 8) * z, "z": z}
        for c in ob.constraints:
            assert eval_at(c, pt) == 0
        for _ in range(3):
            jets = {f"u{i}": Fraction(rng.randint(1, 7), rng.randint(1, 3)) for i in range(8)}
            jets["x"] = Fraction(1)
            assert eval_at(ob.residue, {**pt, **jets}) == 0


def test_b11_constraint_ideal():
    ps = ("c0", "c1", "a2", "a3", "b3", "b4", "b5", "b6")
    entry = get("b11", keep=ps)
    r = check_conditions_parametric(entry.flow, 3)
    cs = r.constraints.constraints
    target = parse("c0*(4*c0^2 - 5*c1)", ps)
    assert ideal_contains(cs, target, ps)


def test_symmetry_examples():
    kdv = get("kdv").flow
    assert is_symmetry(kdv, kdv)[0]
    assert is_symmetry(kdv, get("kdv5").flow)[0]
    assert is_symmetry(get("mkdv").flow, get("mkdv5").flow)[0]
    ok, c = is_symmetry(kdv, get("mkdv5").flow)
    assert not ok and not c.is_zero()


def test_commutator_antisymmetry():
    F, G = get("kdv").flow.rhs, parse("u3*u + u1^2")
    assert (commutator(F, G) + commutator(G, F)).is_zero()


def test_flux_of_density():
    F = get("kdv").flow
    assert flux_of_density(F, parse("1")).is_constant()
    g = parse("u2 + 3*u^2")
    theta = flux_of_density(Flow(total_x(g)), u)
    assert (theta - g).is_constant()


def test_flux_of_rational_rho_minus1():
    entry = get("eq10", k=1)
    r = check_conditions(entry.flow, -1)
    theta = flux_of_density(entry.flow, r.rho_minus1)
    assert total_x(theta) == dt_along(entry.flow, r.rho_minus1)

from fractions import Fraction

import pytest

from hamint.calculus import euler, total_x
from hamint.exactness import extract_constraints, ideal_contains, is_exact, obstruction_parts
from hamint.expr import Expression, jet, param, radical, x_var
from hamint.integrate import integrate
from hamint.parsing import parse

u, u1, u2, u3 = (jet(i) for i in range(4))
x = x_var()


def _dx_total(res):
    out = total_x(res.flux)
    for lt in res.log_terms:
        out = out + lt.dx
    return out


def test_simple_exact():
    res = is_exact(u1 * u2)
    assert res.exact and res.flux == u1 ** 2 / 2


def test_simple_not_exact():
    res = is_exact(u1 ** 2)
    assert not res.exact
    assert not res.residue.is_zero()
    assert not euler(res.residue).is_zero()


def test_round_trip_and_gauge():
    g = x * u ** 2 * u1
    res = is_exact(total_x(g))
    assert res.exact
    assert (res.flux - g).is_constant()
    assert is_exact(total_x(g + 7)).flux == res.flux


def test_x_only_residue():
    assert is_exact(x ** 3 + 1).exact
    assert not is_exact(x * u).exact


def test_rational_and_radical():
    for g in [u2 / (u1 ** 2 + 1), u1 ** 2 / u ** 3, radical(u2 + u, 1, 3) * u1,
              radical(u1 + u ** 2, 2, 3), u3 * radical(u2, -7, 3) * u2]:
        res = is_exact(total_x(g))
        assert res.exact, g
        assert _dx_total(res) == total_x(g)


def test_log_flux():
    # u2/u1 = D_x log(u1)
    res = is_exact(u2 / u1)
    assert res.exact and res.log_terms
    assert _dx_total(res) == u2 / u1


def test_integrate_hermite():
    Q, L = integrate(1 / (u ** 2 + 1) ** 2, "u0")
    assert Q == u / (2 * (u ** 2 + 1))
    assert L == 1 / (2 * (u ** 2 + 1))


def test_constraints_example():
    c = param("c")
    ob = extract_constraints(c * u1 ** 2 + u1 * u2, ["c"])
    assert [str(p) for p in ob.constraints] == ["c"]
    assert extract_constraints(Expression.constant(0)).empty


def test_constraints_kill_residue():
    a, b = param("a"), param("b")
    S = (a - 2 * b) * u1 ** 2 * u + (a ** 2 - 4 * b ** 2) * u2 ** 2 + u1 * u2
    ob = extract_constraints(S, ["a", "b"])
    assert not ob.empty
    at = S.with_params(["a", "b"])
    from hamint.expr import compose
    assert is_exact(compose(at, {"a": 2 * Expression.constant(1), "b": Expression.constant(1)})).exact


def test_obstruction_parts_empty_iff_exact():
    assert obstruction_parts(total_x(u * u2)) == []
    assert obstruction_parts(u1 ** 2)


def test_ideal_membership():
    ps = ["a", "b"]
    a, b = param("a", ps), param("b", ps)
    gens = [a * b, a ** 2]
    assert ideal_contains(gens, a ** 2 * b + a * b, ps)
    assert not ideal_contains(gens, a, ps)
    assert ideal_contains(gens, a, ps, radical=True)


def test_not_exact_residue_euler_nonzero(rng):
    for _ in range(40):
        S = parse(f"{rng.randint(1, 5)}*u1^2*u + {rng.randint(-3, 3)}*u2*u1 + {rng.randint(1, 4)}*u^3*u2^2")
        res = is_exact(S)
        assert not res.exact
        assert not euler(res.residue).is_zero()


@pytest.mark.parametrize("S", ["u3*u2^2", "u1^3*u2", "x^2*u1", "u2*u1/(u^2+1)^2"])
def test_exact_iff_euler_zero(S):
    e = parse(S)
    assert is_exact(e).exact == euler(e).is_zero()


def test_unsupported_radical_shape_is_an_error():
    from hamint.exactness import UnsupportedShape
    with pytest.raises(UnsupportedShape):
        is_exact(u1 * radical(u ** 2 + 1, 1, 2) * u)

import random
from fractions import Fraction

import pytest

from hamint.calculus import Flow, euler, total_x
from hamint.catalog import bind_params, get
from hamint.expr import Expression, eval_at, jet, x_var
from hamint.hamiltonian import (
    HamiltonianValue,
    PointTransformation,
    TransformError,
    equivalent,
    flow_of,
    pushforward_flow,
    transform_dilate,
    transform_galilean,
    transform_point,
    transform_shift,
)
from hamint.parsing import parse

u, u1, u2 = jet(0), jet(1), jet(2)
x = x_var()
KDV5 = parse("1/2*u2^2 - 5*u*u1^2 + 5/2*u^4")


def test_flow_of_linear_and_kdv5():
    assert flow_of(u2 ** 2 / 2).rhs == jet(5)
    assert flow_of(KDV5).rhs == total_x(parse("u4 + 10*u*u2 + 5*u1^2 + 10*u^3"))


def test_flow_of_cube_root_is_fifth_order():
    F = flow_of(get("eq8").expr)
    assert F.order == 5 and F.rhs.rad is not None


def test_order_limit():
    with pytest.raises(Exception):
        HamiltonianValue(jet(3) ** 2)


def test_point_example_linear():
    # x = 2y, u = v/2: prolongation divides each derivative by 2 once more
    T = PointTransformation(2 * x, u / 2)
    assert T.canonical
    Ht = transform_point(u2 ** 2 / 2, T)
    assert Ht.canonical
    assert Ht.H == 2 * (u2 / 8) ** 2 / 2


def test_point_identity():
    T = PointTransformation(x, u)
    assert transform_point(KDV5, T).H == KDV5


def test_swap_is_tagged():
    H = x ** 3 * u1 / 2 + parse("1/2")
    Ht = transform_point(H, PointTransformation(u, x))
    assert not Ht.canonical
    assert Ht.conformal == -1
    with pytest.raises(TransformError):
        flow_of(Ht)
    assert flow_of(Ht, allow_conformal=True).order >= 0


def test_point_rejects_non_polynomial():
    with pytest.raises(TransformError):
        PointTransformation(x / u, u)
    with pytest.raises(TransformError):
        PointTransformation(x ** 5, u)


def test_singular_point_transformation():
    with pytest.raises(TransformError):
        transform_point(KDV5, PointTransformation(x + u, x + u))


@pytest.mark.parametrize("phi,psi", [("x + u^2", "u"), ("2*x", "1/2*u + x^2"), ("x", "u + x^3")])
def test_canonical_covariance(phi, psi):
    T = PointTransformation(parse(phi), parse(psi))
    assert T.canonical
    for H in [KDV5, parse("u2^2/(2*u^5) - 15/8*u1^4/u^7")]:
        lhs = flow_of(transform_point(H, T)).rhs
        rhs = pushforward_flow(flow_of(H), T)
        assert lhs == rhs


def test_covariance_eval_based():
    rng = random.Random(5)
    T = PointTransformation(parse("x + u^2"), parse("u"))
    H = get("eq9").expr
    lhs = flow_of(transform_point(H, T)).rhs
    rhs = pushforward_flow(flow_of(H), T)
    for _ in range(10):
        pt = {"x": Fraction(rng.randint(-5, 5), 3)}
        pt.update({f"u{i}": Fraction(rng.randint(1, 9), rng.randint(1, 4)) for i in range(6)})
        assert eval_at(lhs, pt) == eval_at(rhs, pt)


def test_dilate():
    assert transform_dilate(KDV5, 1, 1, 1).H == KDV5
    Ht = transform_dilate(u2 ** 2 / 2, 1, 1, 2).H
    # direct substitution: 1/(1*4) * (2 v_yy)^2 / 2
    assert Ht == Fraction(1, 4) * (2 * u2) ** 2 / 2
    with pytest.raises(TransformError):
        transform_dilate(KDV5, 0, 1, 1)


def _with_k(eid, k):
    from hamint.catalog import _load_file
    e, _ = _load_file(f"{eid}.ham")
    return bind_params(e, {"k": Expression.constant(Fraction(k))})


def test_scaling_normalizes_k_cube_root():
    # k = 64: u -> k^(1/2) u, x -> x/k, time factor k^(-5/6)
    Ht = transform_dilate(_with_k("eq7", 64), Fraction(1, 32), Fraction(1, 64), 8)
    assert equivalent(_with_k("eq7", 1), Ht) == (True, 0)


def test_scaling_normalizes_k_rational():
    # k = 2: u -> u/k, x -> k x, time factor k^(-5)
    Ht = transform_dilate(_with_k("eq10", 2), Fraction(1, 32), 2, Fraction(1, 2))
    assert equivalent(_with_k("eq10", 1), Ht)[0]


def test_galilean():
    c3 = Fraction(3)
    H = u2 ** 2 / 2 + c3 * u ** 2 / 2
    assert transform_galilean(H, c3).H == u2 ** 2 / 2
    assert transform_galilean(H, 0).H == H
    assert transform_galilean(transform_galilean(H, 2), -2).H == H
    with pytest.raises(TransformError, match="precondition"):
        transform_galilean(H + x * u, 1)


def test_shift():
    h = parse("(u2)^(1/3)")
    assert transform_shift(h + x ** 2 * u, "quadratic-in-x", (1, 0)).H == h
    assert transform_shift(h, "quadratic-in-x", (0, 0)).H == h
    c, c0 = Fraction(2), Fraction(3, 10)
    H = c * x * u + Fraction(10, 3) * c0 * parse("u1^(1/2)") + u2 ** 2 * parse("u1^(-5/2)") / 2
    assert not transform_shift(H, "linear-in-x", (c,)).H.depends_on_x()
    with pytest.raises(TransformError):
        transform_shift(KDV5 + x * u ** 2, "linear-in-x", (1,))
    with pytest.raises(TransformError):
        transform_shift(KDV5, "cubic", (1,))


def test_equivalent_examples():
    H = KDV5
    assert equivalent(H, H + total_x(x * u * u1) + 3 * u) == (True, 3)
    assert equivalent(u1 ** 2 / 2, -u * u2 / 2) == (True, 0)
    assert equivalent(u1 ** 2 / 2, u ** 3) == (False, None)


def test_equivalence_relation():
    rng = random.Random(11)
    base = [KDV5, u1 ** 2 / 2, u ** 3 + x * u1]
    for H in base:
        G = H + total_x(rng.randint(1, 5) * u * u1 * x) + rng.randint(-3, 3) * u
        K = G + total_x(u ** 2) - u
        assert equivalent(H, H)[0]
        assert equivalent(H, G)[0] and equivalent(G, H)[0]
        assert equivalent(G, K)[0] and equivalent(H, K)[0]


def test_pushforward_of_identity():
    F = flow_of(KDV5)
    assert pushforward_flow(F, PointTransformation(x, u)) == F.rhs


def test_euler_invariance_under_total_derivative():
    assert euler(KDV5 + total_x(u ** 3 * u1)) == euler(KDV5)

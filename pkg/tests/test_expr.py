from fractions import Fraction

import pytest

from hamint.expr import (
    Expression,
    JetOrderError,
    RadicalError,
    const,
    eval_at,
    jet,
    param,
    radical,
    x_var,
)
from hamint.parsing import ParseError, parse, parse_document, to_text

u, u1, u2 = jet(0), jet(1), jet(2)


def test_like_terms_collect():
    assert u1 + u1 == 2 * u1
    assert to_text(parse("u1+u1")) == "2*u1"


def test_defining_relation():
    r = radical(u2 + u, 1, 3)
    assert r ** 3 == u2 + u
    assert r ** 4 == (u2 + u) * r


def test_common_factor_cancels():
    assert (u ** 2 - 1) / (u - 1) == u + 1


def test_zero_is_unique():
    z = u1 / u - u1 / u
    assert z.is_zero()
    assert z == Expression.constant(0)
    assert eval_at(z, {"u": 3, "u1": 5}) == 0


def test_eval_at():
    assert eval_at(u1 ** 2, {"u1": 3}) == 9
    assert eval_at((u2 + u) / u, {"u": 2, "u2": 4}) == 3


def test_eval_at_pole():
    with pytest.raises(ZeroDivisionError):
        eval_at(1 / u, {"u": 0})


def test_parse_kdv5_and_radical():
    H = parse("1/2*u2^2 - 5*u*u1^2 + 5/2*u^4")
    assert H == u2 ** 2 / 2 - 5 * u * u1 ** 2 + Fraction(5, 2) * u ** 4
    R = parse("(u2 + 5*u^2*u1 + 2*u^5)^(1/3)")
    assert R.rad is not None and R.rad.m == 3


def test_aliases():
    assert parse("ux*uxx") == u1 * u2


def test_round_trip_text():
    for s in ["1/2*u2^2 - 5*u*u1^2", "(u2)^(1/3) + x*u", "u3^2*u2^(-7/3)", "(u1 + 1)/(u^2 + 3)"]:
        e = parse(s)
        assert parse(to_text(e)) == e


def test_params_must_be_declared():
    with pytest.raises(ParseError):
        parse("k*u")
    assert parse("k*u", ["k"]) == param("k") * u


def test_parse_error_position():
    with pytest.raises(ParseError) as exc:
        parse("u1 + * 2")
    assert exc.value.pos == 5


def test_parse_document_header():
    e, names = parse_document("# comment\nparams: k, c0\nk*u + c0\n")
    assert names == ("k", "c0")
    assert e.free_params() == {"k", "c0"}


def test_radical_constant_extraction():
    assert radical(Expression.constant(8) * u1 ** 3, 1, 3) == 2 * u1
    r = radical(4 * u2, 1, 2)
    assert r ** 2 == 4 * u2


def test_radical_index_rejected():
    with pytest.raises(RadicalError):
        radical(u2, 1, 7)


def test_second_radical_rejected():
    with pytest.raises(RadicalError):
        radical(u2, 1, 3) + radical(u1, 1, 2)


def test_radical_exponent_range():
    r = radical(u2 + x_var(), 1, 3)
    for k in range(-7, 8):
        e = r ** k
        if e.rad is not None:
            ri = e.ring.r_index
            for exps, _ in e.num.terms():
                assert 0 <= exps[ri] < 3


def test_jet_order_limit():
    with pytest.raises(JetOrderError):
        jet(100)


def test_order_and_dependence():
    e = x_var() * u2 + u
    assert e.order == 2
    assert e.depends_on_x()
    assert const(3).order == -1

import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hamint.expr import Expression, jet, radical, x_var  # noqa: E402

SEED = 1729
DATA = Path(__file__).parent.parent / "src" / "hamint" / "catalog_data"
GOLDEN = Path(__file__).parent / "golden"

ACCEPTANCE: dict[int, str] = {}


def rand_q(rng: random.Random, lo=-5, hi=5) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.randint(1, 4))


def rand_poly(rng: random.Random, max_order=3, terms=3, max_deg=2) -> Expression:
    """A small random polynomial in x, u, u1, .., u_max_order."""
    out = Expression.constant(0)
    gens = [x_var()] + [jet(i) for i in range(max_order + 1)]  # max_order = -1 gives x only
    for _ in range(terms):
        m = Expression.constant(rand_q(rng))
        for _ in range(rng.randint(0, max_deg)):
            m = m * rng.choice(gens)
        out = out + m
    return out


def rand_expr(rng: random.Random, max_order=3, radicals=True) -> Expression:
    """Polynomial, rational or radical expression of low order."""
    kind = rng.choice(["poly", "poly", "rational", "radical"] if radicals else ["poly", "rational"])
    p = rand_poly(rng, max_order)
    if kind == "poly":
        return p
    if kind == "rational":
        d = rand_poly(rng, max_order=min(max_order, 1), terms=2, max_deg=1)
        d = d * d + 1  # never identically zero
        return p / d
    # radicand linear in its own top jet: the supported shape for integration
    k = rng.randint(0, max_order)
    lower = rand_poly(rng, max_order=k - 1, terms=2, max_deg=2) if k else rand_q(rng) * x_var() ** 2
    base = rand_q(rng, 1, 3) * jet(k) + lower + 1
    return p * radical(base, rng.choice([1, -1, 2]), rng.choice([2, 3]))


@pytest.fixture
def rng():
    return random.Random(SEED)


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])

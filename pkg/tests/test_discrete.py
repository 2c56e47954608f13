import random
from fractions import Fraction

import pytest

from varsym.errors import ReductionError, ValidationError
from varsym.expr import ZeroTest, add, diff_partial, fn, mul, parse, power, substitute, sym
from varsym.discrete import (
    DiscreteGenerator,
    DiscreteLagrangian,
    discrete_euler_lagrange,
    discrete_invariance_residual,
    discrete_noether,
    discrete_solve_generators,
    discrete_verify,
    shift,
    telescoping_defect,
)
from varsym.symmetry import AnsatzSpec

k = sym("k")


def xs(j, name="x"):
    return sym(name, 0, j)


def test_lagrangian_validation():
    L = DiscreteLagrangian.from_text("(x[k+1] - x[k])^2", "x")
    assert L.m == 1 and L.n == 1
    with pytest.raises(ValidationError):
        DiscreteLagrangian.from_text("x[k+1]*y[k]", "x")
    with pytest.raises(ValidationError):
        DiscreteLagrangian.from_text("x'*x[k]", "x")


def test_shift_rewrites_index_and_offsets():
    L = DiscreteLagrangian.from_text("k*x[k]*x[k+1]", "x")
    assert shift(L.expr, 1, L) == parse("(k+1)*x[k+1]*x[k+2]")


def test_generic_first_order_forms():
    # L = F(x[k], x[k+1]) with an undefined F and generator X(x)
    L = DiscreteLagrangian(fn("F", [xs(0), xs(1)]), ("x",), 1)
    F0 = fn("F", [xs(0), xs(1)], [1, 0])
    F1 = fn("F", [xs(0), xs(1)], [0, 1])
    F0_next = fn("F", [xs(1), xs(2)], [1, 0])
    X0, X1 = fn("X", [xs(0)]), fn("X", [xs(1)])
    g = DiscreteGenerator((fn("X", [sym("x")]),))
    assert discrete_euler_lagrange(L) == [add(F0_next, F1)]
    assert discrete_invariance_residual(L, g) == add(mul(F0, X0), mul(F1, X1))
    law = discrete_noether(L, g)
    assert law.phi == mul(F0, X0)
    assert telescoping_defect(L, g) == 0


@pytest.mark.parametrize("text,expected", [
    ("(x[k+1] - x[k])^2", "2*(x[k+1] - x[k]) - 2*(x[k+2] - x[k+1])"),
    ("x[k]*x[k+1]", "x[k] + x[k+2]"),
])
def test_euler_lagrange_examples(text, expected):
    L = DiscreteLagrangian.from_text(text, "x")
    assert discrete_euler_lagrange(L) == [parse(expected)]


def _cost(L, seq):
    total = 0
    for j in range(len(seq) - L.m):
        binding = {k: j}
        binding.update({xs(i): seq[j + i] for i in range(L.m + 1)})
        total = add(total, substitute(L.expr, {s: v if hasattr(v, "kind") else parse(str(v)) for s, v in binding.items()}))
    return total


def test_euler_lagrange_is_gradient_of_cost():
    # interior stationarity of the cost sum equals the discrete equation
    L = DiscreteLagrangian.from_text("k*x[k]^2*x[k+1] + (x[k+2] - x[k])^2", "x")
    seq = [sym(f"u{i}") for i in range(7)]
    cost = _cost(L, seq)
    E = discrete_euler_lagrange(L)[0]
    j = 2  # E at index k involves x[k]..x[k+4]; its unknown is x[k+m]
    binding = {k: parse(str(j))}
    binding.update({xs(i): seq[j + i] for i in range(5)})
    assert add(diff_partial(cost, seq[j + 2]), mul(-1, substitute(E, binding))) == 0


def test_invariance_residual_examples(rng):
    L = DiscreteLagrangian.from_text("(x[k+1] - x[k])^2", "x")
    assert discrete_invariance_residual(L, DiscreteGenerator.from_text("1")) == 0
    L2 = DiscreteLagrangian.from_text("x[k]^2", "x", order=1)
    assert discrete_invariance_residual(L2, DiscreteGenerator.from_text("1")) == parse("2*x[k]")
    L3 = DiscreteLagrangian.from_text("x[k]*x[k+1]", "x")
    assert discrete_invariance_residual(L3, DiscreteGenerator.from_text("x")) == parse("2*x[k]*x[k+1]")


def test_solve_generators():
    L = DiscreteLagrangian.from_text("(x[k+1] - x[k])^2", "x")
    family = discrete_solve_generators(L, AnsatzSpec(degree=1, atoms=()))
    assert family.dimension == 1 and family.basis[0].X == (parse("1"),)
    L = DiscreteLagrangian.from_text("x[k]*x[k+1]", "x")
    assert discrete_solve_generators(L, AnsatzSpec(degree=1, atoms=())).dimension == 0


def test_degenerate_cost_is_flagged():
    L = DiscreteLagrangian(parse("k^2"), ("x",), 1)
    family = discrete_solve_generators(L, AnsatzSpec(degree=1, atoms=()))
    assert family.degenerate and family.dimension == 3


def test_noether_examples():
    L = DiscreteLagrangian.from_text("(x[k+1] - x[k])^2", "x")
    law = discrete_noether(L, DiscreteGenerator.from_text("1"))
    # dL/dx[k] * X = -2*(x[k+1] - x[k])
    assert law.phi == parse("-2*(x[k+1] - x[k])")
    assert discrete_noether(L, DiscreteGenerator.from_text("0")).phi == 0


def _random_poly(rng, m, names, terms=4):
    syms = [sym(n, 0, j) for n in names for j in range(m + 1)] + [k]
    parts = []
    for _ in range(terms):
        c = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
        mono = mul(*[power(rng.choice(syms), rng.randint(1, 2)) for _ in range(rng.randint(1, 3))])
        parts.append(mul(c, mono))
    # make sure the top shift is present
    parts.append(mul(sym(names[0], 0, m), sym(names[0], 0, 0)))
    return add(*parts)


@pytest.mark.parametrize("m", [1, 2])
def test_telescoping_identity_randomized(m):
    rng = random.Random(100 + m)
    for _ in range(10):
        names = ("x",) if rng.random() < 0.5 else ("x", "y")
        L = DiscreteLagrangian(_random_poly(rng, m, names), names, m)
        X = tuple(add(rng.randint(-3, 3), mul(rng.randint(-3, 3), sym(n)), mul(rng.randint(0, 2), k)) for n in names)
        assert telescoping_defect(L, DiscreteGenerator(X)) == 0


def test_verify_exact_zero_for_translation_invariant():
    L = DiscreteLagrangian.from_text("(x[k+1] - x[k])^2", "x")
    law = discrete_noether(L, DiscreteGenerator.from_text("1"))
    check = discrete_verify(L, law, N=50, trials=5)
    assert check.exact and check.deviation == 0


def test_verify_random_quadratic_invariant(rng):
    for _ in range(3):
        a, b = (Fraction(rng.randint(1, 9), rng.randint(1, 5)) for _ in range(2))
        L = DiscreteLagrangian(parse(f"{a}*(x[k+1] - x[k])^2 + {b}*(x[k+1] - x[k])^4"), ("x",), 1)
        law = discrete_noether(L, DiscreteGenerator.from_text("1"))
        check = discrete_verify(L, law, N=30, trials=2, rng=rng)
        assert not check.exact and check.deviation <= 1e-9


def test_verify_flags_non_invariant():
    L = DiscreteLagrangian.from_text("k*x[k]*x[k+1] + x[k+1]^2", "x")
    law = discrete_noether(L, DiscreteGenerator.from_text("x"))
    assert law.invariance is ZeroTest.NONZERO
    assert discrete_verify(L, law, N=20, trials=2).deviation > 1e-3


def test_verify_second_order_two_variables():
    L = DiscreteLagrangian.from_text(
        "(x[k+2] - 2*x[k+1] + x[k])^2 + (y[k+2] - y[k])^2 + (x[k+1] - x[k])*(y[k+2] - y[k+1])", "x,y")
    for X in (["1", "0"], ["0", "1"]):
        law = discrete_noether(L, DiscreteGenerator.from_text(X))
        check = discrete_verify(L, law, N=30, trials=2)
        assert check.exact and check.deviation == 0


def test_verify_unsolvable_recurrence():
    L = DiscreteLagrangian.from_text("(x[k+1] - x[k])^2 + y[k]*x[k]", "x,y")
    law = discrete_noether(L, DiscreteGenerator.from_text(["0", "0"]))
    with pytest.raises(ReductionError):
        discrete_verify(L, law, N=5, trials=1)


def test_verify_random_quadratic_in_differences(rng):
    # quadratic forms in the differences are translation invariant; the recurrence is linear
    for _ in range(5):
        a, b, c = (Fraction(rng.randint(1, 9), rng.randint(1, 5)) for _ in range(3))
        L = DiscreteLagrangian(
            parse(f"{a}*(x[k+2] - x[k+1])^2 + {b}*(x[k+1] - x[k])^2 + {c}*(x[k+2] - x[k+1])*(x[k+1] - x[k])"),
            ("x",), 2)
        law = discrete_noether(L, DiscreteGenerator.from_text("1"))
        check = discrete_verify(L, law, N=30, trials=2, rng=rng)
        assert check.deviation <= 1e-9

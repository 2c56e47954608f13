import pytest

from varsym.errors import OrderError, ValidationError
from varsym.expr import add, diff_partial, mul, parse, sym
from varsym.jet import JetContext, detect_order, total_derivative, total_derivative_n


def test_context_validation():
    with pytest.raises(ValidationError):
        JetContext(("x", "x"))
    with pytest.raises(ValidationError):
        JetContext(("x",), params=("t",))
    with pytest.raises(OrderError):
        JetContext(("x",), m=0)
    ctx = JetContext(("x1", "x2"), m=2)
    assert len(ctx.jet_symbols()) == 10
    assert ctx.base_symbols() == [sym("t"), sym("x1"), sym("x2")]


def test_total_derivative_examples():
    ctx = JetContext(("x",), params=("c",))
    assert total_derivative(parse("x"), ctx) == parse("x'")
    assert total_derivative(parse("t*x'^2"), ctx) == parse("x'^2 + 2*t*x'*x''")
    assert total_derivative(parse("c"), ctx) == 0


def test_total_derivative_rejects_overflow():
    ctx = JetContext(("x",))
    with pytest.raises(OrderError):
        total_derivative(parse("x''"), ctx)
    assert total_derivative(parse("x''"), ctx, check=False) == parse("x'''")


def test_leibniz_and_parameter_commutation():
    ctx = JetContext(("x", "y"), m=2, params=("a",))
    e1, e2 = parse("a*t*x*y'"), parse("exp(a*t)*x'^2 + y")
    lhs = total_derivative(parse(f"({e1})*({e2})"), ctx)

    rhs = add(mul(total_derivative(e1, ctx), e2), mul(e1, total_derivative(e2, ctx)))
    assert add(lhs, mul(-1, rhs)) == 0
    a = sym("a")
    assert diff_partial(total_derivative(e2, ctx), a) == total_derivative(diff_partial(e2, a), ctx)


def test_total_derivative_n():
    ctx = JetContext(("x",), m=2)
    assert total_derivative_n(parse("t^3"), ctx, 3) == 6


def test_detect_order():
    assert detect_order(parse("t*x'^2"), ["x"]) == 1
    assert detect_order(parse("x1'^2 + x2''^2"), ["x1", "x2"]) == 2
    assert detect_order(parse("x^2"), ["x"]) == 0
    with pytest.raises(ValidationError):
        detect_order(parse("t^2"), ["x"])

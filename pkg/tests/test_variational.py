import pytest
import sympy as sp

from varsym.errors import OrderError, ValidationError
from varsym.expr import parse
from varsym.variational import Lagrangian, euler_lagrange

from conftest import sym_name, to_sympy


def test_from_text_order_rules():
    assert Lagrangian.from_text("t*x'^2", "x").m == 1
    assert Lagrangian.from_text("t*x'^2", "x", order=2).m == 2
    with pytest.raises(OrderError):
        Lagrangian.from_text("x''^2", "x", order=1)
    with pytest.raises(OrderError):
        Lagrangian.from_text("x^2", "x")
    with pytest.raises(ValidationError):
        Lagrangian.from_text("x'^2 + b", "x")


@pytest.mark.parametrize("text,variables,expected", [
    ("t*x'^2", "x", ["-2*x' - 2*t*x''"]),
    ("x1'^2 + x2''^2", "x1,x2", ["-2*x1''", "2*x2''''"]),
    ("x'^2", "x", ["-2*x''"]),
])
def test_euler_lagrange_examples(text, variables, expected):
    L = Lagrangian.from_text(text, variables)
    assert list(euler_lagrange(L)) == [parse(e) for e in expected]


def _sympy_el(text, names, params):
    """Euler-Lagrange equations from sympy's own implementation."""
    L = Lagrangian.from_text(text, names, params)
    t = sp.Symbol("t")
    funcs = {n: sp.Function(n)(t) for n in L.ctx.names}
    repl = {}
    for n, f in funcs.items():
        for k in range(2 * L.m + 1):
            repl[sp.Symbol(sym_name(n, k))] = f.diff(t, k)
    Ls = to_sympy(L.expr).xreplace(repl)
    eqs = sp.euler_equations(Ls, list(funcs.values()), t)
    return L, [eq.lhs for eq in eqs], repl


@pytest.mark.parametrize("text,names,params", [
    ("m/2*(q1'^2 + q2'^2) + K/sqrt(q1^2 + q2^2)", "q1,q2", "m,K"),
    ("t^2/2*(x'^2 - x^6/3)", "x", ""),
    ("x'^2/2 + 2/5*x^(5/2)/sqrt(t)", "x", ""),
    ("1/2*(m*x'^2 - k*x^2)*exp(a*t/m)", "x", "m,k,a"),
    ("x1'^2 + x1*x2''^2 + t*x2'*x1'", "x1,x2", ""),
])
def test_euler_lagrange_against_sympy(text, names, params):
    L, ref, repl = _sympy_el(text, names, params)
    ours = [to_sympy(e).xreplace(repl) for e in euler_lagrange(L)]
    for a, b in zip(ours, ref):
        assert sp.simplify(a - b) == 0

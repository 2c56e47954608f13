"""Canonical symbolic expressions over exact rationals."""

from varsym.expr.calculus import diff_partial, fn_atoms, func_atoms, substitute
from varsym.expr.core import (
    HALF,
    MINUS_ONE,
    ONE,
    ZERO,
    Expr,
    Fn,
    Sym,
    add,
    as_expr,
    cos,
    exp,
    fn,
    func,
    ln,
    mul,
    num,
    power,
    sin,
    sqrt,
    sym,
    terms_of,
)
from varsym.expr.evaluate import compile_float, evaluate, random_point, random_rational
from varsym.expr.parse import KNOWN_FUNCTIONS, parse
from varsym.expr.poly import (
    ZeroTest,
    clear_denominators,
    collect,
    is_transcendental,
    is_zero,
    numeric_zero,
    set_precision,
    simplify,
    split_terms,
)
from varsym.expr.render import from_json, render, symbol_text, to_json

__all__ = [
    "HALF", "MINUS_ONE", "ONE", "ZERO", "Expr", "Fn", "Sym", "KNOWN_FUNCTIONS", "ZeroTest",
    "add", "as_expr", "clear_denominators", "collect", "compile_float", "cos", "diff_partial",
    "evaluate", "exp", "fn", "fn_atoms", "from_json", "func", "func_atoms", "is_transcendental",
    "is_zero", "ln", "mul", "num", "numeric_zero", "parse", "power", "random_point",
    "random_rational", "render", "set_precision", "simplify", "sin", "split_terms", "sqrt", "substitute", "sym",
    "symbol_text", "terms_of", "to_json",
]

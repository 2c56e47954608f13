"""Exact and high-precision evaluation, random sample points, float compilation."""

from __future__ import annotations

import math
import random
from fractions import Fraction

import mpmath

from varsym.errors import DomainError, UnboundSymbolError
from varsym.expr.core import ADD, FN, FUNC, MUL, NUM, POW, SYM, Expr, _exact_root, as_expr, sym

DEFAULT_PRECISION = 50


def _to_number(v):
    if isinstance(v, bool):
        raise TypeError("booleans are not numbers")
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, Expr):
        if v.kind != NUM:
            raise TypeError(f"binding value must be numeric, got {v}")
        return v.value
    if isinstance(v, str):
        return Fraction(v)
    return mpmath.mpf(v)


def _normalise(bindings) -> dict:
    out = {}
    for key, value in bindings.items():
        if isinstance(key, str):
            from varsym.expr.parse import parse

            key = parse(key)
        out[key] = _to_number(value)
    return out


def evaluate(e, bindings, precision: int = DEFAULT_PRECISION):
    """Value of ``e`` under ``bindings``.

    Returns a :class:`Fraction` when every step stays rational, otherwise an
    ``mpmath.mpf`` computed at ``precision`` decimal digits.  Keys of
    ``bindings`` may be symbols or their text form (``"x'"``, ``"q1"``).
    """
    env = _normalise(bindings)
    with mpmath.workdps(precision + 5):
        value = _ev(as_expr(e), env, {})
    if isinstance(value, Fraction):
        return value
    with mpmath.workdps(precision):
        return +value


def _is_exact(v) -> bool:
    return isinstance(v, Fraction)


def _mp(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return v


def _ev(e: Expr, env: dict, memo: dict):
    hit = memo.get(e)
    if hit is not None:
        return hit
    k = e.kind
    if k == NUM:
        out = e.value
    elif k in (SYM, FN):
        if e not in env:
            raise UnboundSymbolError(str(e))
        out = env[e]
    elif k == ADD:
        out = Fraction(0)
        for t in e.terms:
            out = out + _ev(t, env, memo)
    elif k == MUL:
        out = e.coeff
        for f in e.factors:
            out = out * _ev(f, env, memo)
    elif k == POW:
        out = _pow(_ev(e.base, env, memo), _ev(e.exp, env, memo))
    elif k == FUNC:
        out = _func(e.name, _ev(e.arg, env, memo))
    else:
        raise TypeError(f"cannot evaluate {e!r}")
    memo[e] = out
    return out


def _pow(b, x):
    if b == 0:
        if x < 0:
            raise DomainError("division by zero")
        if x == 0:
            return Fraction(1)
        return Fraction(0)
    if _is_exact(x) and x.denominator == 1:
        if _is_exact(b):
            return b ** x.numerator
        return _mp(b) ** int(x)
    if b < 0:
        raise DomainError(f"non-integer power of negative number {b}")
    if _is_exact(b) and _is_exact(x):
        root = _exact_root(b, x.denominator)
        if root is not None:
            return root**x.numerator
    return mpmath.power(_mp(b), _mp(x))


def _func(name: str, v):
    if name == "ln":
        if v <= 0:
            raise DomainError(f"ln of non-positive value {mpmath.nstr(_mp(v), 8)}")
        if v == 1:
            return Fraction(0)
        return mpmath.log(_mp(v))
    if name == "exp":
        return Fraction(1) if v == 0 else mpmath.exp(_mp(v))
    if name == "sin":
        return Fraction(0) if v == 0 else mpmath.sin(_mp(v))
    if name == "cos":
        return Fraction(1) if v == 0 else mpmath.cos(_mp(v))
    raise ValueError(f"unknown function {name!r}")


# ---------------------------------------------------------------------------
# random sample points


def random_rational(rng: random.Random, lo: Fraction = Fraction(0), hi: Fraction | None = None, bound: int = 1000):
    """Random rational with numerator and denominator at most ``bound``.

    With ``hi`` given the value lies strictly inside (lo, hi); otherwise it is a
    positive rational p/q.
    """
    if hi is None:
        return Fraction(rng.randint(1, bound), rng.randint(1, bound))
    q = rng.randint(2, bound)
    width = hi - lo
    p = rng.randint(1, q - 1)
    return lo + width * Fraction(p, q)


def random_point(symbols, rng: random.Random, t_name: str = "t", bound: int = 1000) -> dict:
    """Sample positive rationals for ``symbols``; the independent variable lies in (1, 2)."""
    point = {}
    for s in sorted(symbols, key=lambda s: s.sort_key):
        if s.kind == SYM and s.name == t_name and s.order == 0 and s.shift is None:
            point[s] = random_rational(rng, Fraction(1), Fraction(2), bound)
        else:
            point[s] = random_rational(rng, bound=bound)
    return point


# ---------------------------------------------------------------------------
# float compilation


_FLOAT_FUNCS = {"ln": "_log", "exp": "_exp", "sin": "_sin", "cos": "_cos"}


def _float_source(e: Expr, names: dict) -> str:
    k = e.kind
    if k == NUM:
        v = e.value
        return repr(float(v)) if v.denominator != 1 else f"{v.numerator}.0"
    if k in (SYM, FN):
        try:
            return names[e]
        except KeyError:
            raise UnboundSymbolError(str(e)) from None
    if k == ADD:
        return "(" + " + ".join(_float_source(t, names) for t in e.terms) + ")"
    if k == MUL:
        parts = [_float_source(f, names) for f in e.factors]
        if e.coeff != 1:
            parts.insert(0, repr(float(e.coeff)))
        return "(" + " * ".join(parts) + ")"
    if k == POW:
        x = e.exp
        base = _float_source(e.base, names)
        if x.kind == NUM and x.value.denominator == 1:
            return f"({base} ** {x.value.numerator})"
        return f"_pow({base}, {_float_source(x, names)})"
    if k == FUNC:
        return f"{_FLOAT_FUNCS[e.name]}({_float_source(e.arg, names)})"
    raise TypeError(f"cannot compile {e!r}")


def _fpow(b, x):
    if b < 0:
        raise DomainError(f"non-integer power of negative number {b}")
    if b == 0 and x < 0:
        raise DomainError("division by zero")
    return b**x


def _flog(v):
    if v <= 0:
        raise DomainError(f"ln of non-positive value {v}")
    return math.log(v)


def compile_float(exprs, symbols):
    """Compile expressions to a float function ``f(*values) -> tuple``.

    ``symbols`` fixes the positional order of the arguments.
    """
    exprs = [as_expr(e) for e in exprs]
    names = {s: f"a{i}" for i, s in enumerate(symbols)}
    body = ", ".join(_float_source(e, names) for e in exprs)
    args = ", ".join(names[s] for s in symbols)
    src = f"def _f({args}):\n    return ({body},)\n"
    scope = {"_pow": _fpow, "_log": _flog, "_exp": math.exp, "_sin": math.sin, "_cos": math.cos}
    exec(compile(src, "<varsym-compiled>", "exec"), scope)
    return scope["_f"]


__all__ = [
    "DEFAULT_PRECISION",
    "evaluate",
    "random_rational",
    "random_point",
    "compile_float",
    "sym",
]

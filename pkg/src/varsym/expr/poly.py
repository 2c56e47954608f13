"""Simplification, coefficient collection, denominator clearing and zero testing."""

from __future__ import annotations

import enum
import logging
import random
from fractions import Fraction

import mpmath

from varsym.errors import DomainError, PolynomialError
from varsym.expr.core import (
    ADD,
    FN,
    FUNC,
    MUL,
    NUM,
    ONE,
    POW,
    Expr,
    _make_term,
    _term_parts,
    add,
    as_expr,
    base_exp,
    children,
    mul,
    num,
    power,
    preorder,
    rebuild,
    terms_of,
)
from varsym.expr.evaluate import evaluate, random_point

log = logging.getLogger(__name__)


def simplify(e) -> Expr:
    """Rebuild ``e`` bottom-up through the canonical constructors.

    Expressions made by this package are already canonical, so this is the
    identity on them; it matters for trees assembled directly from nodes.
    """
    e = as_expr(e)
    memo: dict = {}

    def walk(node):
        hit = memo.get(id(node))
        if hit is not None:
            return hit[1]
        kids = children(node)
        if node.kind == MUL:
            out = mul(num(node.coeff), *(walk(c) for c in kids))
        elif kids:
            out = rebuild(node, [walk(c) for c in kids])
        elif node.kind == NUM:
            out = num(node.value)
        else:
            out = node
        memo[id(node)] = (node, out)
        return out

    return walk(e)


# ---------------------------------------------------------------------------
# collection


def collect(e, vars) -> dict:
    """Split ``e`` into ``{monomial: coefficient}`` over the symbols ``vars``.

    The constant monomial is keyed by ``1``.  Raises :class:`PolynomialError`
    if a member of ``vars`` appears other than as a non-negative integer power.
    """
    e = as_expr(e)
    vs = frozenset(vars)
    out: dict = {}
    for t in terms_of(e):
        c, factors = _term_parts(t)
        mono, rest = [], []
        for f in factors:
            if not (f.free_symbols & vs):
                rest.append(f)
                continue
            b, x = base_exp(f)
            if b in vs and x.kind == NUM and x.value.denominator == 1 and x.value > 0:
                mono.append(f)
            else:
                raise PolynomialError(f"not polynomial in {sorted(map(str, vs))}: {f}", f)
        key = _make_term(Fraction(1), tuple(mono)) if mono else ONE
        coeff = _make_term(c, tuple(rest))
        out[key] = add(out[key], coeff) if key in out else coeff
    return {k: v for k, v in out.items() if v != 0}


def split_terms(e, is_coefficient) -> dict:
    """Group the terms of ``e`` by their non-coefficient factors.

    Each factor ``f`` with ``is_coefficient(f)`` true goes to the coefficient;
    the remaining factors form the key.  With canonical input, distinct keys
    are distinct products of atoms.
    """
    out: dict = {}
    for t in terms_of(as_expr(e)):
        c, factors = _term_parts(t)
        key_f, coef_f = [], []
        for f in factors:
            (coef_f if is_coefficient(f) else key_f).append(f)
        key = _make_term(Fraction(1), tuple(key_f)) if key_f else ONE
        coeff = _make_term(c, tuple(coef_f))
        out[key] = add(out[key], coeff) if key in out else coeff
    return {k: v for k, v in out.items() if v != 0}


def _sum_base_exponents(e: Expr, acc: dict, symbols=None):
    for node in preorder(e):
        if node.kind == POW and node.base.kind == ADD and node.exp.kind == NUM:
            if symbols is not None and not (node.base.free_symbols & symbols):
                continue
            v = node.exp.value
            if v < acc.get(node.base, 0):
                acc[node.base] = v


def clear_denominators(exprs, symbols=None) -> tuple[list, Expr]:
    """Multiply every expression by one common factor that removes negative
    powers of sums.  Returns the cleared expressions and the multiplier.

    With ``symbols`` given, only sums mentioning one of them are cleared.
    """
    exprs = [as_expr(e) for e in exprs]
    lows: dict = {}
    for e in exprs:
        _sum_base_exponents(e, lows, symbols)
    if not lows:
        return exprs, ONE
    factor = mul(*(power(b, -v) for b, v in sorted(lows.items(), key=lambda kv: kv[0].sort_key)))
    return [mul(e, factor) for e in exprs], factor


# ---------------------------------------------------------------------------
# zero testing


class ZeroTest(enum.Enum):
    ZERO = "zero"
    PROBABLY_ZERO = "probably-zero"
    NONZERO = "nonzero"

    @property
    def vanishes(self) -> bool:
        return self is not ZeroTest.NONZERO

    def __bool__(self):
        return self.vanishes


def is_transcendental(e: Expr, generic_functions: bool = True) -> bool:
    """True if ``e`` has a function application, fractional or symbolic power.

    With ``generic_functions`` off, undefined functions count as plain
    indeterminates.
    """
    for node in preorder(e):
        k = node.kind
        if k == FUNC or (k == FN and generic_functions):
            return True
        if k == POW:
            x = node.exp
            if x.kind != NUM or x.value.denominator != 1:
                return True
    return False


# working precision (decimal digits) of numeric zero tests; see set_precision
PRECISION = 50


def set_precision(digits: int) -> None:
    global PRECISION
    if digits < 20:
        raise ValueError("zero tests need at least 20 digits")
    PRECISION = int(digits)


def is_zero(
    e,
    rng: random.Random | None = None,
    points: int = 25,
    precision: int | None = None,
    threshold: float = 1e-30,
) -> ZeroTest:
    """Decide whether ``e`` vanishes identically.

    Rational expressions are decided exactly.  Otherwise ``e`` is sampled at
    ``points`` random points; agreement with zero below ``threshold`` (relative
    to the size of its terms) is reported as ``PROBABLY_ZERO`` and logged.
    """
    e = as_expr(e)
    if e == 0:
        return ZeroTest.ZERO
    if e.kind != ADD:
        # a single canonical term is zero only if a factor is
        if not is_transcendental(e, generic_functions=False):
            return ZeroTest.NONZERO
    (cleared,), _ = clear_denominators([e])
    if cleared == 0:
        return ZeroTest.ZERO
    if not is_transcendental(cleared, generic_functions=False):
        # undefined functions and their derivatives are independent indeterminates
        return ZeroTest.NONZERO
    if FN in {n.kind for n in preorder(cleared)}:
        raise TypeError("cannot sample an expression with undefined functions")
    if numeric_zero(e, rng, points, precision, threshold):
        log.info("zero test: %d-point sample agrees with zero for %s", points, _short(e))
        return ZeroTest.PROBABLY_ZERO
    return ZeroTest.NONZERO


def _mpf(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return v


def _short(e: Expr, limit: int = 120) -> str:
    s = str(e)
    return s if len(s) <= limit else s[: limit - 3] + "..."


def numeric_zero(
    e: Expr,
    rng: random.Random | None = None,
    points: int = 25,
    precision: int | None = None,
    threshold: float = 1e-30,
    t_name: str = "t",
) -> bool:
    """True if ``e`` is below ``threshold`` (relative) at ``points`` random points."""
    precision = precision or PRECISION
    rng = rng or random.Random(0)
    symbols = e.free_symbols
    terms = terms_of(e)
    done = attempts = 0
    while done < points:
        attempts += 1
        if attempts > 20 * points:
            raise DomainError(f"no admissible sample points for {_short(e)}")
        point = random_point(symbols, rng, t_name)
        try:
            with mpmath.workdps(precision):
                values = [evaluate(t, point, precision) for t in terms]
                total = sum(values, Fraction(0))
                scale = max([abs(_mpf(v)) for v in values] + [mpmath.mpf(1)])
        except DomainError:
            continue
        done += 1
        if isinstance(total, Fraction):
            if total != 0:
                return False
        elif abs(total) > threshold * scale:
            return False
    return True


__all__ = [
    "simplify",
    "collect",
    "split_terms",
    "clear_denominators",
    "ZeroTest",
    "is_zero",
    "set_precision",
    "numeric_zero",
    "is_transcendental",
]

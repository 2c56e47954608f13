"""Exact null spaces over a field of parameter expressions.

Entries are canonical expressions in constant parameters.  Elimination is
Gauss-Jordan without division by general pivots: a row is reduced as
``p*row - a*pivot_row``.  Rational and monomial pivots are divided out, which
keeps the common case (every shipped problem) in reduced row-echelon form.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from varsym.expr import ONE, ZERO, Expr, add, as_expr, is_zero, mul, power
from varsym.expr.core import ADD, MUL, NUM, POW, SYM

CONSTANT, MONOMIAL, GENERAL = 0, 1, 2


def pivot_class(e: Expr) -> int:
    if e.kind == NUM:
        return CONSTANT
    if e.kind == ADD:
        return GENERAL
    factors = e.factors if e.kind == MUL else (e,)
    for f in factors:
        if f.kind == SYM:
            continue
        if f.kind == POW and f.base.kind == SYM and f.exp.kind == NUM:
            continue
        return GENERAL
    return MONOMIAL


def _invertible_scale(p: Expr):
    """Exact inverse of a rational or monomial pivot, else None."""
    if pivot_class(p) == GENERAL:
        return None
    return power(p, -1)


@dataclass
class Echelon:
    rows: list  # reduced rows, one per pivot
    pivots: list  # pivot column of each row
    ncols: int

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def free_columns(self) -> list:
        used = set(self.pivots)
        return [c for c in range(self.ncols) if c not in used]


def _nonzero(e: Expr, rng) -> bool:
    if e == 0:
        return False
    return not is_zero(e, rng).vanishes


def echelon(matrix, ncols: int, column_order=None, rng: random.Random | None = None) -> Echelon:
    """Reduce ``matrix`` (rows of expressions) to reduced echelon form.

    Columns are tried as pivots in ``column_order`` (default: last to first,
    which leaves the earliest columns free).  Among candidate rows the pivot
    prefers a rational constant, then a monomial, then anything nonzero.
    """
    rng = rng or random.Random(0)
    rows = [[as_expr(x) for x in r] for r in matrix if any(as_expr(x) != 0 for x in r)]
    order = list(column_order) if column_order is not None else list(reversed(range(ncols)))
    done_rows: list = []
    pivots: list = []
    for col in order:
        best = None
        for idx, r in enumerate(rows):
            entry = r[col]
            if entry == 0:
                continue
            cls = pivot_class(entry)
            if best is not None and cls >= best[0]:
                continue
            if not _nonzero(entry, rng):
                r[col] = ZERO
                continue
            best = (cls, idx)
            if cls == CONSTANT:
                break
        if best is None:
            continue
        prow = rows.pop(best[1])
        inv = _invertible_scale(prow[col])
        if inv is not None:
            prow = [mul(x, inv) for x in prow]
            prow[col] = ONE
        rows = [r for r in (_eliminate(r, prow, col) for r in rows) if any(x != 0 for x in r)]
        done_rows = [_eliminate(r, prow, col) for r in done_rows]
        done_rows.append(prow)
        pivots.append(col)
    return Echelon(done_rows, pivots, ncols)


def _eliminate(r: list, prow: list, col: int) -> list:
    a = r[col]
    if a == 0:
        return r
    p = prow[col]
    if p == 1:
        new = [add(x, mul(-1, a, y)) for x, y in zip(r, prow)]
    else:
        new = [add(mul(p, x), mul(-1, a, y)) for x, y in zip(r, prow)]
    new[col] = ZERO
    return new


def null_space(matrix, ncols: int, column_order=None, rng: random.Random | None = None, with_free: bool = False):
    """Basis of the right null space, one vector per free column.

    Each vector is 1 at its free column, 0 at the other free columns, and
    solves the pivot rows for the pivot columns.
    """
    ech = echelon(matrix, ncols, column_order, rng)
    basis = []
    for f in ech.free_columns:
        v = [ZERO] * ncols
        v[f] = ONE
        for row, c in zip(ech.rows, ech.pivots):
            if row[f] != 0:
                v[c] = mul(-1, row[f], power(row[c], -1))
        basis.append(v)
    if with_free:
        return ech.free_columns, basis
    return basis


def rank(matrix, ncols: int, rng: random.Random | None = None) -> int:
    return echelon(matrix, ncols, rng=rng).rank

"""Jet-space bookkeeping and the total derivative along trajectories."""

from __future__ import annotations

from dataclasses import dataclass, field

from varsym.errors import OrderError, ValidationError
from varsym.expr import ZERO, Expr, add, as_expr, diff_partial, mul, sym
from varsym.expr.core import SYM


@dataclass(frozen=True)
class JetContext:
    """Independent variable ``t``, dependent variables ``names`` and order ``m``.

    Jet symbols ``x^(k)`` are ``Sym(name, k)``; orders up to ``2m`` are in range.
    """

    names: tuple
    m: int = 1
    t: str = "t"
    params: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "params", tuple(self.params))
        if not self.names:
            raise ValidationError("at least one dependent variable is required")
        if self.m < 1:
            raise OrderError(f"order must be at least 1, got {self.m}")
        everything = list(self.names) + list(self.params) + [self.t]
        if len(set(everything)) != len(everything):
            raise ValidationError(f"symbol names must be distinct: {everything}")

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def tsym(self):
        return sym(self.t)

    def x(self, i: int, k: int = 0):
        return sym(self.names[i], k)

    def jet(self, k: int) -> list:
        """The n symbols of derivative order k."""
        return [sym(name, k) for name in self.names]

    def jet_symbols(self, max_order: int | None = None) -> list:
        top = 2 * self.m if max_order is None else max_order
        return [sym(name, k) for k in range(top + 1) for name in self.names]

    def param_symbols(self) -> list:
        return [sym(p) for p in self.params]

    def base_symbols(self) -> list:
        """t followed by x_1..x_n, the arguments of generators."""
        return [self.tsym] + self.jet(0)

    def is_jet(self, s) -> bool:
        return s.kind == SYM and s.shift is None and s.name in self.names

    def is_param(self, s) -> bool:
        return s.kind == SYM and s.order == 0 and s.shift is None and s.name in self.params

    def order_of(self, e: Expr) -> int:
        """Highest derivative order present in ``e`` (-1 if no jet symbol)."""
        orders = [s.order for s in as_expr(e).free_symbols if self.is_jet(s)]
        return max(orders, default=-1)

    def with_order(self, m: int) -> "JetContext":
        return JetContext(self.names, m, self.t, self.params)


def total_derivative(e, ctx: JetContext, check: bool = True) -> Expr:
    """D_t e = de/dt + sum over jet symbols of x^(k+1) * de/dx^(k).

    With ``check`` set, input already at order 2m is rejected because the
    result would leave the context.
    """
    e = as_expr(e)
    if check and ctx.order_of(e) >= 2 * ctx.m:
        raise OrderError(f"total derivative would exceed order {2 * ctx.m}")
    parts = []
    t = ctx.tsym
    for s in sorted(e.free_symbols, key=lambda s: s.sort_key):
        if s == t:
            parts.append(diff_partial(e, t))
        elif ctx.is_jet(s):
            parts.append(mul(sym(s.name, s.order + 1), diff_partial(e, s)))
    return add(*parts) if parts else ZERO


def total_derivative_n(e, ctx: JetContext, times: int, check: bool = True) -> Expr:
    for _ in range(times):
        e = total_derivative(e, ctx, check)
    return e


def detect_order(e, names) -> int:
    """Highest derivative order of the dependent variables in ``e``.

    ``names`` is a :class:`JetContext` or a list of variable names.
    """
    e = as_expr(e)
    if isinstance(names, JetContext):
        names = names.names
    orders = [s.order for s in e.free_symbols if s.kind == SYM and s.shift is None and s.name in names]
    if not orders:
        raise ValidationError(f"no dependent variable among {list(names)} appears")
    return max(orders)

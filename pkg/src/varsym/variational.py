"""Lagrangians and their Euler-Lagrange systems."""

from __future__ import annotations

from dataclasses import dataclass

from varsym.errors import OrderError, ValidationError
from varsym.expr import Expr, add, as_expr, diff_partial, parse, render
from varsym.jet import JetContext, detect_order, total_derivative_n


@dataclass(frozen=True)
class Lagrangian:
    expr: Expr
    ctx: JetContext

    def __post_init__(self):
        object.__setattr__(self, "expr", as_expr(self.expr))
        validate_symbols(self.expr, self.ctx, self.ctx.m)

    @classmethod
    def from_text(cls, text: str, variables, params=(), order: int | None = None, t: str = "t"):
        """Parse ``text`` and build a Lagrangian; the order is detected unless given.

        An explicit order may raise the detected one but never lower it.
        """
        if isinstance(variables, str):
            variables = [v.strip() for v in variables.split(",") if v.strip()]
        if isinstance(params, str):
            params = [p.strip() for p in params.split(",") if p.strip()]
        expr = parse(text)
        found = detect_order(expr, variables)
        if order is None:
            order = found
        elif order < found:
            raise OrderError(f"declared order {order} is below the detected order {found}")
        if order < 1:
            raise OrderError("the Lagrangian has no derivative of a dependent variable (order 0)")
        return cls(expr, JetContext(tuple(variables), order, t, tuple(params)))

    @property
    def m(self) -> int:
        return self.ctx.m

    def __str__(self):
        return render(self.expr)


def validate_symbols(e: Expr, ctx: JetContext, max_order: int, allow=()) -> None:
    """Reject undeclared symbols and jet symbols above ``max_order``."""
    allowed = set(allow)
    for s in e.free_symbols:
        if s.shift is not None:
            raise ValidationError(f"shifted symbol {s} in a continuous problem")
        if ctx.is_jet(s):
            if s.order > max_order:
                raise OrderError(f"{s} exceeds order {max_order}")
        elif s.order:
            raise ValidationError(f"derivative of undeclared variable: {s}")
        elif not (s.name == ctx.t or ctx.is_param(s) or s.name in allowed):
            raise ValidationError(f"undeclared symbol {s.name!r}; declare it as a variable or parameter")


@dataclass(frozen=True)
class EulerLagrangeSystem:
    """Left-hand sides E_i of the equations E_i = 0, one per dependent variable."""

    equations: tuple
    ctx: JetContext

    def __iter__(self):
        return iter(self.equations)

    def __len__(self):
        return len(self.equations)

    def __getitem__(self, i):
        return self.equations[i]


def euler_lagrange(L: Lagrangian) -> EulerLagrangeSystem:
    """E_i = dL/dx_i + sum_{k=1..m} (-1)^k D_t^k (dL/dx_i^(k))."""
    ctx = L.ctx
    eqs = []
    for i in range(ctx.n):
        parts = [diff_partial(L.expr, ctx.x(i, 0))]
        for k in range(1, ctx.m + 1):
            term = total_derivative_n(diff_partial(L.expr, ctx.x(i, k)), ctx, k)
            parts.append(term if k % 2 == 0 else -term)
        eqs.append(add(*parts))
    return EulerLagrangeSystem(tuple(eqs), ctx)

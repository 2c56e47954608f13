"""Noether conservation laws and their verification along extremals."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from varsym.errors import DomainError, IntegrationError, ReductionError, UnboundSymbolError
from varsym.expr import (
    ZERO,
    Expr,
    ZeroTest,
    add,
    as_expr,
    clear_denominators,
    compile_float,
    diff_partial,
    is_zero,
    mul,
    power,
    render,
    substitute,
    sym,
)
from varsym.expr.evaluate import _to_number
from varsym.jet import JetContext, total_derivative
from varsym.symmetry import GeneratorTuple, determining_residual, p_sequence
from varsym.variational import Lagrangian, euler_lagrange

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PsiSequence:
    """psi[i] holds the n multipliers of order i, for i = 1..m."""

    psi: dict
    m: int

    def __getitem__(self, i: int) -> list:
        return self.psi[i]


def psi_sequence(L: Lagrangian) -> PsiSequence:
    """Psi^m = dL/dx^(m), Psi^(i-1) = dL/dx^(i-1) - D_t Psi^i, down to Psi^1."""
    ctx = L.ctx
    m = ctx.m
    psi = {m: [diff_partial(L.expr, ctx.x(j, m)) for j in range(ctx.n)]}
    for i in range(m, 1, -1):
        psi[i - 1] = [
            add(diff_partial(L.expr, ctx.x(j, i - 1)), mul(-1, total_derivative(psi[i][j], ctx)))
            for j in range(ctx.n)
        ]
    return PsiSequence(psi, m)


@dataclass
class ConservationLaw:
    phi: Expr
    order: int
    generator: GeneratorTuple
    invariance: ZeroTest = ZeroTest.ZERO
    constants: list = field(default_factory=list)

    @property
    def warning(self) -> str | None:
        if self.invariance.vanishes:
            return None
        return "generator does not pass the invariance test; the law may not be conserved"

    def text(self, fmt: str = "text") -> str:
        return f"{render(self.phi, fmt)} = const"

    def to_dict(self, fmt: str = "text") -> dict:
        return {
            "phi": render(self.phi, fmt),
            "order": self.order,
            "generator": self.generator.to_dict(fmt),
            "constants": list(self.constants),
            "invariance": self.invariance.value,
            "warning": self.warning,
        }


def conservation_law(
    L: Lagrangian, g: GeneratorTuple, constants=(), rng: random.Random | None = None
) -> ConservationLaw:
    """phi = sum_i Psi^i . p^(i-1) + (L - sum_i Psi^i . x^(i)) T.

    The invariance of ``g`` is tested and recorded; a failing generator only
    produces a warning on the returned law.
    """
    ctx = L.ctx
    psi = psi_sequence(L)
    p = p_sequence(g.T, g.X, ctx)
    parts = []
    energy = [L.expr]
    for i in range(1, ctx.m + 1):
        for j in range(ctx.n):
            parts.append(mul(psi[i][j], p[i - 1][j]))
            energy.append(mul(-1, psi[i][j], ctx.x(j, i)))
    parts.append(mul(add(*energy), g.T))
    phi = add(*parts)
    verdict = is_zero(determining_residual(L, g), rng)
    if not verdict.vanishes:
        log.warning("generator %s is not a variational symmetry", g.to_dict())
    return ConservationLaw(phi, max(ctx.order_of(phi), 0), g, verdict, list(constants))


# ---------------------------------------------------------------------------
# reduction modulo the Euler-Lagrange system


@dataclass
class ReductionRules:
    """Solved form x_j^(r_j) = R_j of the Euler-Lagrange system, with prolongations."""

    ctx: JetContext
    top: dict  # variable name -> leading order r_j
    rules: dict  # Sym -> expression free of orders >= r_j

    def leading(self) -> list:
        return [sym(name, r) for name, r in self.top.items()]

    def _rule(self, s):
        hit = self.rules.get(s)
        if hit is not None:
            return hit
        below = self._rule(sym(s.name, s.order - 1))
        out = self.reduce(total_derivative(below, self.ctx, check=False))
        self.rules[s] = out
        return out

    def _reducible(self, e: Expr) -> list:
        return [s for s in e.free_symbols if s.name in self.top and s.shift is None and s.order >= self.top[s.name]]

    def reduce(self, e: Expr, limit: int = 50) -> Expr:
        """Replace every derivative at or above its leading order, repeatedly."""
        e = as_expr(e)
        for _ in range(limit):
            hits = self._reducible(e)
            if not hits:
                return e
            e = substitute(e, {s: self._rule(s) for s in hits})
        raise ReductionError("reduction did not terminate")


def reduction_rules(L: Lagrangian, rng: random.Random | None = None) -> ReductionRules:
    """Solve the Euler-Lagrange system for each variable's highest derivative.

    The system must be linear in those derivatives with a nonsingular
    coefficient matrix; otherwise :class:`ReductionError` is raised.
    """
    ctx = L.ctx
    eqs = list(euler_lagrange(L))
    top = {}
    for name in ctx.names:
        orders = [s.order for e in eqs for s in e.free_symbols if s.name == name and s.shift is None]
        if not orders:
            raise ReductionError(f"the Euler-Lagrange system does not involve {name}")
        top[name] = max(orders)
    lead = [sym(name, r) for name, r in top.items()]
    A = [[diff_partial(e, s) for s in lead] for e in eqs]
    for row in A:
        for a in row:
            if a.free_symbols & set(lead):
                raise ReductionError("Euler-Lagrange system is not linear in its highest derivatives")
    b = [substitute(e, {s: ZERO for s in lead}) for e in eqs]
    solution = _solve_linear(A, [mul(-1, x) for x in b], rng)
    return ReductionRules(ctx, top, dict(zip(lead, solution)))


def _solve_linear(A: list, rhs: list, rng) -> list:
    n = len(A)
    M = [list(row) + [r] for row, r in zip(A, rhs)]
    cols = len(M[0]) - 1
    if n != cols:
        raise ReductionError("Euler-Lagrange system is not square in its highest derivatives")
    for c in range(cols):
        piv = None
        for r in range(c, n):
            if M[r][c] != 0 and is_zero(M[r][c], rng) is ZeroTest.NONZERO:
                piv = r
                break
        if piv is None:
            raise ReductionError("degenerate Hessian: cannot solve for the highest derivatives")
        M[c], M[piv] = M[piv], M[c]
        inv = power(M[c][c], -1)
        M[c] = [mul(x, inv) for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                a = M[r][c]
                M[r] = [add(x, mul(-1, a, y)) for x, y in zip(M[r], M[c])]
    return [row[-1] for row in M]


def verify_symbolic(L: Lagrangian, law: ConservationLaw, rng: random.Random | None = None) -> Expr:
    """D_t phi reduced modulo the Euler-Lagrange system (zero for a true law)."""
    rules = reduction_rules(L, rng)
    dphi = total_derivative(law.phi, L.ctx, check=False)
    residual = rules.reduce(dphi)
    # the solved derivatives may carry denominators; a zero numerator is a zero residual
    (numerator,), _ = clear_denominators([residual])
    return ZERO if numerator == 0 else residual


def on_trajectory(e: Expr, ctx: JetContext, trajectory: dict) -> Expr:
    """Substitute closed-form x_j(t) and its derivatives into ``e``."""
    e = as_expr(e)
    mapping = {}
    t = ctx.tsym
    for name, xt in trajectory.items():
        xt = as_expr(xt)
        top = max([s.order for s in e.free_symbols if s.name == name and s.shift is None], default=0)
        d = xt
        for k in range(top + 1):
            mapping[sym(name, k)] = d
            d = diff_partial(d, t)
    return substitute(e, mapping)


# ---------------------------------------------------------------------------
# numeric verification


@dataclass
class NumericCheck:
    drift: float
    tolerance: float
    times: np.ndarray
    values: np.ndarray

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.drift) and self.drift <= self.tolerance)


def _lookup(ic: dict, s):
    for key in (s, str(s), s.name if s.order == 0 else None):
        if key is not None and key in ic:
            return ic[key]
    raise UnboundSymbolError(str(s))


def verify_numeric(
    L: Lagrangian,
    law: ConservationLaw,
    ic: dict,
    horizon: float,
    tol: float = 1e-6,
    rtol: float = 1e-10,
    samples: int = 200,
) -> NumericCheck:
    """Integrate the Euler-Lagrange system and measure how much phi drifts.

    ``ic`` maps ``"t0"`` (default 0), every state derivative ``x``, ``x'``, ...
    below the leading order, and each parameter to a number.  Returns the
    maximum of |phi(t) - phi(t0)| / max(1, |phi(t0)|) over the samples.
    """
    ctx = L.ctx
    eqs = list(euler_lagrange(L))
    top = {}
    for name in ctx.names:
        top[name] = max(s.order for e in eqs for s in e.free_symbols if s.name == name and s.shift is None)
    lead = [sym(name, r) for name, r in top.items()]
    A = [[diff_partial(e, s) for s in lead] for e in eqs]
    b = [substitute(e, {s: ZERO for s in lead}) for e in eqs]
    state = [sym(name, k) for name in ctx.names for k in range(top[name])]
    params = ctx.param_symbols()
    phi = law.phi
    over = [s for s in phi.free_symbols if s.name in top and s.shift is None and s.order >= top[s.name]]
    if over:
        phi = reduction_rules(L).reduce(phi)
    # free constants of a generator family default to 1 unless ic fixes them
    extra = {}
    for s in phi.free_symbols - set(state) - set(params) - {ctx.tsym}:
        try:
            extra[s] = _to_number(_lookup(ic, s))
        except UnboundSymbolError:
            if s.name not in law.constants:
                raise
            extra[s] = 1
    if extra:
        phi = substitute(phi, {s: v if isinstance(v, Fraction) else Fraction(v) for s, v in extra.items()})

    args = [ctx.tsym] + state + params
    f_A = compile_float([a for row in A for a in row], args)
    f_b = compile_float(b, args)
    f_phi = compile_float([phi], args)
    try:
        pvals = [float(_to_number(_lookup(ic, p))) for p in params]
        y0 = [float(_to_number(_lookup(ic, s))) for s in state]
    except UnboundSymbolError as err:
        raise UnboundSymbolError(f"initial condition missing for {err}") from None
    t0 = float(_to_number(ic.get("t0", 0)))
    n = ctx.n
    index = {}
    pos = 0
    for name in ctx.names:
        index[name] = pos
        pos += top[name]

    def rhs(t, y):
        vals = (t, *y, *pvals)
        Am = np.array(f_A(*vals)).reshape(n, n)
        bv = np.array(f_b(*vals))
        lead_vals = np.linalg.solve(Am, -bv)
        if not np.all(np.isfinite(lead_vals)):
            raise DomainError(f"non-finite derivatives at t = {t}")
        dy = np.empty_like(y)
        for j, name in enumerate(ctx.names):
            start, r = index[name], top[name]
            dy[start : start + r - 1] = y[start + 1 : start + r]
            dy[start + r - 1] = lead_vals[j]
        return dy

    from scipy.integrate import solve_ivp  # deferred: scipy dominates start-up time

    times = np.linspace(t0, t0 + horizon, samples)
    try:
        sol = solve_ivp(rhs, (t0, t0 + horizon), y0, method="DOP853", rtol=rtol, atol=rtol * 1e-2, t_eval=times)
    except (np.linalg.LinAlgError, DomainError, ZeroDivisionError, OverflowError) as err:
        raise IntegrationError(f"integration failed: {err}") from err
    if not sol.success:
        raise IntegrationError(f"integration failed: {sol.message}")
    try:
        values = np.array([f_phi(t, *y, *pvals)[0] for t, y in zip(sol.t, sol.y.T)])
    except (DomainError, ZeroDivisionError) as err:
        raise IntegrationError(f"singular data while evaluating the law: {err}") from err
    phi0 = values[0]
    drift = float(np.max(np.abs(values - phi0)) / max(1.0, abs(phi0)))
    return NumericCheck(drift, tol, sol.t, values)

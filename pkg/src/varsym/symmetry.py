"""Determining equation for variational symmetries and its ansatz solver.

A generator (T, X) is a variational symmetry of L exactly when

    dL/dt*T + sum_i sum_j dL/dx_j^(i) * p^i_j + L * D_t T = 0

identically, with p^0 = X and p^(i+1) = D_t p^i - x^(i+1) D_t T.  The
residual is linear in (T, X), so expanding T and X over a finite function
basis turns the equation into a homogeneous linear system whose rows come
from collecting the residual over independent atoms.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass, field

from varsym.errors import AnsatzError, PolynomialError, ValidationError
from varsym.expr import (
    ONE,
    ZERO,
    Expr,
    add,
    as_expr,
    clear_denominators,
    collect,
    diff_partial,
    fn,
    is_zero,
    mul,
    numeric_zero,
    parse,
    render,
    split_terms,
    substitute,
    sym,
)
from varsym.expr.core import FUNC, MUL, NUM, POW, SYM, preorder
from varsym.jet import JetContext, total_derivative
from varsym.linalg import null_space, rank
from varsym.variational import Lagrangian

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeneratorTuple:
    """Infinitesimal generators: T for the independent variable, X[i] for x_i."""

    T: Expr
    X: tuple

    def __post_init__(self):
        object.__setattr__(self, "T", as_expr(self.T))
        object.__setattr__(self, "X", tuple(as_expr(x) for x in self.X))
        for e in (self.T,) + self.X:
            for s in e.free_symbols:
                if s.order >= 1 or s.shift is not None:
                    raise ValidationError(f"generators may not depend on {s}")

    @classmethod
    def from_text(cls, T: str, X) -> "GeneratorTuple":
        if isinstance(X, str):
            X = [X]
        return cls(parse(str(T)), tuple(parse(str(x)) for x in X))

    def components(self) -> tuple:
        return (self.T,) + self.X

    def scaled(self, c) -> "GeneratorTuple":
        return GeneratorTuple(mul(c, self.T), tuple(mul(c, x) for x in self.X))

    def __add__(self, other: "GeneratorTuple") -> "GeneratorTuple":
        return GeneratorTuple(add(self.T, other.T), tuple(add(a, b) for a, b in zip(self.X, other.X)))

    def substitute(self, mapping: dict) -> "GeneratorTuple":
        return GeneratorTuple(substitute(self.T, mapping), tuple(substitute(x, mapping) for x in self.X))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.components())

    def to_dict(self, fmt: str = "text") -> dict:
        return {"T": render(self.T, fmt), "X": [render(x, fmt) for x in self.X]}


def zero_generator(n: int) -> GeneratorTuple:
    return GeneratorTuple(ZERO, (ZERO,) * n)


@dataclass(frozen=True)
class AnsatzSpec:
    """Function basis for T and each X_i.

    Monomials in (t, x_1..x_n) of total degree <= ``degree``, plus each atom
    times monomials of degree <= ``degree - 1``.  ``overrides`` maps ``"T"``
    or a variable name to its own degree (a negative degree removes the slot).
    """

    degree: int = 2
    atoms: tuple = None
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.degree < 0:
            raise AnsatzError(f"ansatz degree must be non-negative, got {self.degree}")
        atoms = DEFAULT_ATOMS if self.atoms is None else self.atoms
        object.__setattr__(self, "atoms", tuple(parse(a) if isinstance(a, str) else as_expr(a) for a in atoms))
        object.__setattr__(self, "overrides", dict(self.overrides))

    def degree_for(self, slot: str) -> int:
        return self.overrides.get(slot, self.degree)


DEFAULT_ATOMS = ("t*ln(t)", "ln(t)")


@dataclass(frozen=True)
class Column:
    slot: int  # 0 for T, i+1 for X_i
    function: Expr
    degree: int
    atom: int  # -1 for a plain monomial

    @property
    def transcendental(self) -> bool:
        return self.atom >= 0


def monomials(vars, degree: int) -> list:
    """Monomials of total degree <= ``degree``, by degree then canonical order."""
    out = []
    for d in range(degree + 1):
        layer = [mul(*combo) if combo else ONE for combo in itertools.combinations_with_replacement(vars, d)]
        layer.sort(key=lambda e: e.sort_key)
        out.extend(layer)
    return out


def ansatz_columns(ctx: JetContext, spec: AnsatzSpec) -> list:
    base = ctx.base_symbols()
    allowed = set(ctx.params) | {ctx.t} | set(ctx.names)
    for a in spec.atoms:
        for s in a.free_symbols:
            if s.order or s.shift is not None or s.name not in allowed:
                raise AnsatzError(f"ansatz atom {a} may only depend on t, the variables and parameters")
    slots = ["T"] + list(ctx.names)
    poly, trans = [], []
    for slot_idx, slot in enumerate(slots):
        d = spec.degree_for(slot)
        if slot != "T" and slot not in spec.overrides:
            d = spec.overrides.get(f"X{slot_idx}", d)
        if d < 0:
            continue
        seen = set()
        for mono in monomials(base, d):
            seen.add(mono)
            poly.append(Column(slot_idx, mono, _total_degree(mono), -1))
        for ai, atom in enumerate(spec.atoms):
            for mono in monomials(base, d - 1):
                f = mul(atom, mono)
                if f in seen or f == 0:
                    continue
                seen.add(f)
                trans.append(Column(slot_idx, f, _total_degree(mono), ai))
    poly.sort(key=lambda c: (c.degree, c.slot))
    if not poly and not trans:
        raise AnsatzError("the ansatz basis is empty")
    return poly + trans


def _total_degree(mono: Expr) -> int:
    if mono == 1:
        return 0
    factors = mono.factors if mono.kind == MUL else (mono,)
    total = 0
    for f in factors:
        if f.kind == POW:
            total += int(f.exp.value)
        else:
            total += 1
    return total


# ---------------------------------------------------------------------------
# determining equation


def p_sequence(T, X, ctx: JetContext) -> list:
    """[p^0, ..., p^m], each a list of n expressions."""
    T = as_expr(T)
    X = [as_expr(x) for x in X]
    if len(X) != ctx.n:
        raise ValidationError(f"expected {ctx.n} X generators, got {len(X)}")
    DT = total_derivative(T, ctx)
    seq = [X]
    for i in range(ctx.m):
        prev = seq[-1]
        seq.append([add(total_derivative(prev[j], ctx), mul(-1, ctx.x(j, i + 1), DT)) for j in range(ctx.n)])
    return seq


def determining_residual(L: Lagrangian, g: GeneratorTuple) -> Expr:
    """Left side of the invariance identity for the generator ``g``."""
    ctx = L.ctx
    if len(g.X) != ctx.n:
        raise ValidationError(f"expected {ctx.n} X generators, got {len(g.X)}")
    p = p_sequence(g.T, g.X, ctx)
    parts = [mul(diff_partial(L.expr, ctx.tsym), g.T), mul(L.expr, total_derivative(g.T, ctx))]
    for i in range(ctx.m + 1):
        for j in range(ctx.n):
            dL = diff_partial(L.expr, ctx.x(j, i))
            if dL != 0:
                parts.append(mul(dL, p[i][j]))
    return add(*parts)


@dataclass(frozen=True)
class DeterminingSystem:
    residual: Expr
    coefficient_equations: tuple
    monomials: tuple  # jet monomial multiplying each equation
    unknowns: GeneratorTuple


def generic_generator(ctx: JetContext) -> GeneratorTuple:
    base = ctx.base_symbols()
    return GeneratorTuple(fn("T", base), tuple(fn(f"X{i + 1}" if ctx.n > 1 else "X", base) for i in range(ctx.n)))


def build_determining_system(L: Lagrangian, unknowns: GeneratorTuple | None = None) -> DeterminingSystem:
    """Split the residual for unknown generator functions into one equation
    per monomial in the derivative symbols of order 1..m."""
    ctx = L.ctx
    g = unknowns or generic_generator(ctx)
    res = determining_residual(L, g)
    jets = [s for k in range(1, ctx.m + 1) for s in ctx.jet(k)]
    try:
        groups = collect(res, jets)
    except PolynomialError as err:
        raise PolynomialError(f"residual is not polynomial in the derivatives: {err.subterm}", err.subterm) from err
    keys = sorted(groups, key=lambda k: k.sort_key)
    return DeterminingSystem(res, tuple(groups[k] for k in keys), tuple(keys), g)


# ---------------------------------------------------------------------------
# solving


@dataclass
class GeneratorFamily:
    """Basis of the solution space, with free-constant labels C1..Ck."""

    basis: list
    labels: list
    ctx: JetContext
    ansatz: AnsatzSpec | None = None
    zero_test: list = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def general(self) -> GeneratorTuple:
        """Sum of C_i times the i-th basis tuple (zero tuple when empty)."""
        total = zero_generator(self.ctx.n)
        for c, g in zip(self.labels, self.basis):
            total = total + g.scaled(sym(c))
        return total

    def combination(self, coeffs) -> GeneratorTuple:
        total = zero_generator(self.ctx.n)
        for c, g in zip(coeffs, self.basis):
            total = total + g.scaled(as_expr(c))
        return total

    def specialize(self, values: dict) -> GeneratorTuple:
        """General tuple with the named constants replaced; unnamed ones become 0."""
        coeffs = [as_expr(values.get(label, 0)) for label in self.labels]
        return self.combination(coeffs)

    def contains(self, g: GeneratorTuple, rng: random.Random | None = None) -> bool:
        return in_span(self.basis, g, self.ctx, rng)


def _coefficient_filter(ctx: JetContext):
    params = frozenset(ctx.param_symbols())

    def is_coefficient(f: Expr) -> bool:
        return f.free_symbols <= params

    return is_coefficient


def _keyed_rows(exprs: list, ctx: JetContext) -> tuple[list, list]:
    """Collect each expression over non-parameter atoms; returns (keys, rows)."""
    nonparam = frozenset(ctx.jet_symbols()) | {ctx.tsym}
    cleared, _ = clear_denominators(exprs, nonparam)
    is_coefficient = _coefficient_filter(ctx)
    split = [split_terms(e, is_coefficient) for e in cleared]
    keys = sorted({k for d in split for k in d}, key=lambda k: k.sort_key)
    rows = [[d.get(k, ZERO) for d in split] for k in keys]
    return keys, rows


def _check_polynomial_in_jets(keys, ctx: JetContext):
    for key in keys:
        for node in preorder(key):
            if node.kind not in (FUNC, POW):
                continue
            if node.kind == POW and node.base.kind == SYM and node.exp.kind == NUM and node.exp.value > 0:
                if node.exp.value.denominator == 1:
                    continue
            if any(ctx.is_jet(s) and s.order >= 1 for s in node.free_symbols):
                raise PolynomialError(f"residual is not polynomial in the derivatives: {node}", node)


def solve_generators(
    L: Lagrangian,
    spec: AnsatzSpec | None = None,
    rng: random.Random | None = None,
    check_points: int = 100,
) -> GeneratorFamily:
    """Variational symmetries of ``L`` inside the ansatz basis."""
    spec = spec or AnsatzSpec()
    rng = rng or random.Random(0)
    ctx = L.ctx
    columns = ansatz_columns(ctx, spec)
    residuals = []
    for col in columns:
        comps = [ZERO] * (ctx.n + 1)
        comps[col.slot] = col.function
        residuals.append(determining_residual(L, GeneratorTuple(comps[0], tuple(comps[1:]))))
    keys, rows = _keyed_rows(residuals, ctx)
    _check_polynomial_in_jets(keys, ctx)
    free, vectors = null_space(rows, len(columns), rng=rng, with_free=True)

    def label_order(item):
        f, v = item
        touches = any(x != 0 and col.transcendental for x, col in zip(v, columns))
        return (not touches, f)

    vectors = [v for _, v in sorted(zip(free, vectors), key=label_order)]
    basis = []
    for v in vectors:
        comps = [[] for _ in range(ctx.n + 1)]
        for c, coef in zip(columns, v):
            if coef != 0:
                comps[c.slot].append(mul(coef, c.function))
        basis.append(GeneratorTuple(add(*comps[0]), tuple(add(*c) for c in comps[1:])))
    verdicts = []
    for g in basis:
        res = determining_residual(L, g)
        verdict = is_zero(res, rng)
        if not verdict.vanishes or (res != 0 and not numeric_zero(res, rng, check_points)):
            raise AnsatzError(
                f"generator {g.to_dict()} fails the invariance check; the collected atoms were not independent"
            )
        verdicts.append(verdict.value)
    labels = [f"C{i + 1}" for i in range(len(basis))]
    log.info("symmetry family of dimension %d from %d basis columns, %d equations", len(basis), len(columns), len(rows))
    return GeneratorFamily(basis, labels, ctx, spec, verdicts)


def in_span(basis: list, g: GeneratorTuple, ctx: JetContext, rng: random.Random | None = None) -> bool:
    """Exact test that ``g`` is a parameter-field combination of ``basis``."""
    tuples = list(basis) + [g]
    vectors = []
    for slot in range(ctx.n + 1):
        exprs = [tp.components()[slot] for tp in tuples]
        _, rows = _keyed_rows(exprs, ctx)
        vectors.extend(rows)
    if not vectors:
        return True
    # columns are the tuples; g is in the span iff appending it keeps the rank
    if not basis:
        return all(row[-1] == 0 for row in vectors)
    without = [row[:-1] for row in vectors]
    return rank(vectors, len(tuples), rng) == rank(without, len(basis), rng)

"""Discrete-time variational problems: cost sum of L(k, x[k], ..., x[k+m]).

Shifted values are symbols ``Sym(name, 0, j)`` rendered ``x[k+j]``; the
index itself is the plain symbol ``k``.  Shifting rewrites ``k -> k+s`` and
``x[k+j] -> x[k+j+s]`` everywhere.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from varsym.errors import AnsatzError, ReductionError, ValidationError
from varsym.expr import (
    ZERO,
    Expr,
    ZeroTest,
    add,
    as_expr,
    clear_denominators,
    diff_partial,
    evaluate,
    is_zero,
    mul,
    numeric_zero,
    parse,
    random_rational,
    render,
    split_terms,
    substitute,
    sym,
)
from varsym.linalg import null_space
from varsym.symmetry import AnsatzSpec, monomials

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DiscreteLagrangian:
    expr: Expr
    names: tuple
    m: int
    params: tuple = ()
    index: str = "k"

    def __post_init__(self):
        object.__setattr__(self, "expr", as_expr(self.expr))
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "params", tuple(self.params))
        if not self.names:
            raise ValidationError("at least one dependent variable is required")
        if self.m < 1:
            raise ValidationError(f"discrete order must be at least 1, got {self.m}")
        for s in self.expr.free_symbols:
            if s.shift is not None:
                if s.name not in self.names:
                    raise ValidationError(f"undeclared variable {s.name!r}")
                if not 0 <= s.shift <= self.m:
                    raise ValidationError(f"{s} is outside the shifts 0..{self.m}")
            elif s.order:
                raise ValidationError(f"derivative {s} in a discrete problem")
            elif s.name in self.names:
                raise ValidationError(f"write {s.name}[k] for the current value of {s.name}")
            elif s.name != self.index and s.name not in self.params:
                raise ValidationError(f"undeclared symbol {s.name!r}; declare it as a parameter")

    @classmethod
    def from_text(cls, text: str, variables, params=(), order: int | None = None, index: str = "k"):
        if isinstance(variables, str):
            variables = [v.strip() for v in variables.split(",") if v.strip()]
        if isinstance(params, str):
            params = [p.strip() for p in params.split(",") if p.strip()]
        expr = parse(text)
        shifts = [s.shift for s in expr.free_symbols if s.shift is not None and s.name in variables]
        if not shifts:
            raise ValidationError(f"no shifted variable among {list(variables)} appears")
        found = max(shifts)
        if order is None:
            order = found
        elif order < found:
            raise ValidationError(f"declared order {order} is below the largest shift {found}")
        return cls(expr, tuple(variables), order, tuple(params), index)

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def ksym(self):
        return sym(self.index)

    def x(self, i: int, j: int):
        return sym(self.names[i], 0, j)

    def partial(self, i: int, j: int) -> Expr:
        """dL/dx_i^j, the derivative in the slot x_i[k+j]."""
        return diff_partial(self.expr, self.x(i, j))

    def __str__(self):
        return render(self.expr)


def shift(e, s: int, L: DiscreteLagrangian) -> Expr:
    """Rewrite k -> k+s and x[k+j] -> x[k+j+s]."""
    e = as_expr(e)
    if s == 0:
        return e
    mapping = {}
    for v in e.free_symbols:
        if v.shift is not None and v.name in L.names:
            mapping[v] = sym(v.name, 0, v.shift + s)
        elif v == L.ksym:
            mapping[v] = add(v, s)
    return substitute(e, mapping)


def discrete_euler_lagrange(L: DiscreteLagrangian) -> list:
    """E_i = sum_j dL/dx_i^j evaluated at (k+m-j, ..., k+2m-j)."""
    return [add(*(shift(L.partial(i, j), L.m - j, L) for j in range(L.m + 1))) for i in range(L.n)]


@dataclass(frozen=True)
class DiscreteGenerator:
    """X_i(k, x) for each variable; written with plain names (``x``) or ``x[k]``."""

    X: tuple

    def __post_init__(self):
        object.__setattr__(self, "X", tuple(_unshift(as_expr(x)) for x in self.X))
        for e in self.X:
            for s in e.free_symbols:
                if s.shift is not None or s.order:
                    raise ValidationError(f"generators may not depend on {s}")

    @classmethod
    def from_text(cls, X) -> "DiscreteGenerator":
        if isinstance(X, str):
            X = [X]
        return cls(tuple(parse(str(x)) for x in X))

    def at(self, j: int, L: DiscreteLagrangian) -> list:
        """X(k+j, x(k+j))."""
        out = []
        for e in self.X:
            mapping = {sym(name): sym(name, 0, j) for name in L.names}
            if j:
                mapping[L.ksym] = add(L.ksym, j)
            out.append(substitute(e, mapping))
        return out

    def to_dict(self, fmt: str = "text") -> dict:
        return {"X": [render(x, fmt) for x in self.X]}


def _unshift(e: Expr) -> Expr:
    hits = {s: sym(s.name) for s in e.free_symbols if s.shift == 0}
    return substitute(e, hits) if hits else e


def discrete_invariance_residual(L: DiscreteLagrangian, g: DiscreteGenerator) -> Expr:
    """sum_j dL/dx^j . X(k+j, x(k+j)), with L at (k, x(k), ..., x(k+m))."""
    if len(g.X) != L.n:
        raise ValidationError(f"expected {L.n} generators, got {len(g.X)}")
    parts = []
    for j in range(L.m + 1):
        Xj = g.at(j, L)
        for i in range(L.n):
            parts.append(mul(L.partial(i, j), Xj[i]))
    return add(*parts)


@dataclass
class DiscreteFamily:
    basis: list
    labels: list
    degenerate: bool = False

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def general(self, n: int) -> DiscreteGenerator:
        parts = [[] for _ in range(n)]
        for c, g in zip(self.labels, self.basis):
            for i, x in enumerate(g.X):
                parts[i].append(mul(sym(c), x))
        return DiscreteGenerator(tuple(add(*p) for p in parts))

    def specialize(self, values: dict, n: int) -> DiscreteGenerator:
        parts = [[] for _ in range(n)]
        for c, g in zip(self.labels, self.basis):
            coef = as_expr(values.get(c, 0))
            for i, x in enumerate(g.X):
                parts[i].append(mul(coef, x))
        return DiscreteGenerator(tuple(add(*p) for p in parts))


def discrete_solve_generators(
    L: DiscreteLagrangian, spec: AnsatzSpec | None = None, rng: random.Random | None = None
) -> DiscreteFamily:
    """Invariance generators inside a monomial basis in (k, x_1..x_n).

    Shifted symbols and ``k`` are collection variables, so every monomial
    coefficient of the residual has to vanish for all k.
    """
    spec = spec or AnsatzSpec(atoms=())
    rng = rng or random.Random(0)
    base = [L.ksym] + [sym(name) for name in L.names]
    allowed = {L.index, *L.names, *L.params}
    columns = []
    for slot, name in enumerate(L.names):
        d = spec.degree_for(name)
        if d < 0:
            continue
        seen = set()
        for mono in monomials(base, d):
            seen.add(mono)
            columns.append((slot, mono))
        for atom in spec.atoms:
            if any(s.name not in allowed or s.order or s.shift is not None for s in atom.free_symbols):
                raise AnsatzError(f"ansatz atom {atom} may only depend on k, the variables and parameters")
            for mono in monomials(base, d - 1):
                f = mul(atom, mono)
                if f not in seen:
                    seen.add(f)
                    columns.append((slot, f))
    if not columns:
        raise AnsatzError("the ansatz basis is empty")
    residuals = []
    for slot, f in columns:
        X = [ZERO] * L.n
        X[slot] = f
        residuals.append(discrete_invariance_residual(L, DiscreteGenerator(tuple(X))))
    params = frozenset(sym(p) for p in L.params)
    cleared, _ = clear_denominators(residuals, frozenset(s for r in residuals for s in r.free_symbols) - params)
    split = [split_terms(r, lambda f: f.free_symbols <= params) for r in cleared]
    keys = sorted({k for d in split for k in d}, key=lambda k: k.sort_key)
    rows = [[d.get(k, ZERO) for d in split] for k in keys]
    free, vectors = null_space(rows, len(columns), rng=rng, with_free=True)
    basis = []
    for v in vectors:
        X = [[] for _ in range(L.n)]
        for (slot, f), c in zip(columns, v):
            if c != 0:
                X[slot].append(mul(c, f))
        g = DiscreteGenerator(tuple(add(*p) for p in X))
        res = discrete_invariance_residual(L, g)
        if not is_zero(res, rng).vanishes or (res != 0 and not numeric_zero(res, rng, 100)):
            raise AnsatzError(f"generator {g.to_dict()} fails the invariance check")
        basis.append(g)
    degenerate = not any(s.shift is not None for s in L.expr.free_symbols)
    if degenerate:
        log.warning("the Lagrangian does not depend on the variables; every generator is admissible")
    return DiscreteFamily(basis, [f"C{i + 1}" for i in range(len(basis))], degenerate)


@dataclass
class DiscreteConservationLaw:
    phi: Expr
    psi: list  # psi[j][i] for j = 0..m-1
    generator: DiscreteGenerator
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
            "generator": self.generator.to_dict(fmt),
            "constants": list(self.constants),
            "invariance": self.invariance.value,
            "warning": self.warning,
        }


def discrete_psi(L: DiscreteLagrangian) -> list:
    """Psi^0 = dL/dx^0, Psi^j = Psi^(j-1)(k+1) + dL/dx^j for j < m."""
    psi = [[L.partial(i, 0) for i in range(L.n)]]
    for j in range(1, L.m):
        psi.append([add(shift(psi[-1][i], 1, L), L.partial(i, j)) for i in range(L.n)])
    return psi


def discrete_noether(
    L: DiscreteLagrangian, g: DiscreteGenerator, constants=(), rng: random.Random | None = None
) -> DiscreteConservationLaw:
    """phi = sum_{j<m} Psi^j(k) . X(k+j, x(k+j))."""
    psi = discrete_psi(L)
    parts = []
    for j in range(L.m):
        Xj = g.at(j, L)
        for i in range(L.n):
            parts.append(mul(psi[j][i], Xj[i]))
    verdict = is_zero(discrete_invariance_residual(L, g), rng)
    if not verdict.vanishes:
        log.warning("generator %s does not leave the cost invariant", g.to_dict())
    return DiscreteConservationLaw(add(*parts), psi, g, verdict, list(constants))


def telescoping_defect(L: DiscreteLagrangian, g: DiscreteGenerator) -> Expr:
    """phi(k+1) - phi(k) - E(k).X(k+m) + R(k); identically zero for any L and X.

    E is the discrete Euler-Lagrange expression and R the invariance residual,
    so on extremals of an invariant problem phi(k+1) = phi(k).
    """
    phi = discrete_noether(L, g).phi
    E = discrete_euler_lagrange(L)
    Xm = g.at(L.m, L)
    R = discrete_invariance_residual(L, g)
    parts = [shift(phi, 1, L), mul(-1, phi), R]
    parts += [mul(-1, E[i], Xm[i]) for i in range(L.n)]
    return add(*parts)


# ---------------------------------------------------------------------------
# brute-force verification


@dataclass
class DiscreteCheck:
    deviation: object  # Fraction when exact, float otherwise
    exact: bool
    steps: int
    trials: int


def _solve_leading(E: list, lead: list, values: dict, rng) -> list:
    """Solve E(values, lead) = 0 for the leading shifts."""
    n = len(lead)
    E = [substitute(e, {s: v for s, v in values.items()}) for e in E]
    A = [[diff_partial(e, s) for s in lead] for e in E]
    linear = all(not (a.free_symbols & set(lead)) for row in A for a in row)
    if linear:
        b = [substitute(e, {s: ZERO for s in lead}) for e in E]
        Anum = [[evaluate(a, {}) for a in row] for row in A]
        bnum = [evaluate(x, {}) for x in b]
        out = _gauss(Anum, [-x for x in bnum])
        return out, all(isinstance(v, Fraction) for v in out)
    if n != 1:
        raise ReductionError("nonlinear discrete recurrence with several variables")
    return [_bisect(E[0], lead[0])], False


def _gauss(A: list, b: list) -> list:
    n = len(A)
    M = [list(r) + [v] for r, v in zip(A, b)]
    for c in range(n):
        piv = max(range(c, n), key=lambda r: abs(M[r][c]))
        if M[piv][c] == 0:
            raise ReductionError("discrete recurrence cannot be solved for the leading shift")
        M[c], M[piv] = M[piv], M[c]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c] / M[c][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [M[i][n] / M[i][i] for i in range(n)]


def _bisect(e: Expr, s, tol: float = 1e-12):
    """Bracket and bisect to ``tol`` (relative), then polish at 50 digits."""

    def f(v):
        return float(evaluate(e, {s: Fraction(v)}))

    lo, hi = -1.0, 1.0
    for _ in range(200):
        try:
            if f(lo) * f(hi) <= 0:
                break
        except ArithmeticError:
            pass
        lo, hi = lo * 2, hi * 2
    else:
        raise ReductionError("could not bracket a root of the discrete recurrence")
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return Fraction(lo)
    if fhi == 0:
        return Fraction(hi)
    while hi - lo > tol * max(1.0, abs(lo), abs(hi)):
        mid = (lo + hi) / 2
        fm = f(mid)
        if fm == 0:
            return Fraction(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    root = (lo + hi) / 2
    with mpmath.workdps(50):
        try:
            polished = mpmath.findroot(lambda v: evaluate(e, {s: v}), mpmath.mpf(root))
            if abs(polished - root) <= 10 * tol * max(1.0, abs(root)):
                return Fraction(mpmath.nstr(polished, 50))
        except (ValueError, ZeroDivisionError, ArithmeticError):
            pass
    return Fraction(root)


def discrete_verify(
    L: DiscreteLagrangian,
    law: DiscreteConservationLaw,
    N: int = 50,
    trials: int = 5,
    rng: random.Random | None = None,
    params: dict | None = None,
    k0: int = 0,
) -> DiscreteCheck:
    """Roll the Euler-Lagrange recurrence from random data and track phi.

    Returns the largest |phi(k) - phi(k0)| over ``N`` steps and ``trials``
    random starts.  Linear recurrences run in exact rational arithmetic.
    """
    rng = rng or random.Random(0)
    m, n = L.m, L.n
    pvals = {sym(p): as_expr(Fraction(v)) for p, v in (params or {}).items()}
    for p in L.params:
        pvals.setdefault(sym(p), as_expr(random_rational(rng, bound=10)))
    E = [substitute(e, pvals) for e in discrete_euler_lagrange(L)]
    phi = substitute(law.phi, pvals)
    reach = max([s.shift for s in phi.free_symbols if s.shift is not None], default=0)
    worst = Fraction(0)
    exact = True
    for _ in range(trials):
        seq = [[Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(n)] for _ in range(2 * m)]
        for step in range(max(0, N + reach + 1 - 2 * m)):
            k = k0 + step
            values = {L.ksym: as_expr(k)}
            for j in range(2 * m):
                for i in range(n):
                    values[L.x(i, j)] = _as_exact(seq[step + j][i])
            lead = [L.x(i, 2 * m) for i in range(n)]
            nxt, solved_exactly = _solve_leading(E, lead, values, rng)
            exact = exact and solved_exactly
            if any(_too_large(v) for v in nxt):
                # nonlinear recurrences blow up rational sizes; continue at 50 digits
                nxt = [_round(v) for v in nxt]
                exact = False
            seq.append(nxt)
        values0 = None
        for step in range(N + 1):
            binding = {L.ksym: k0 + step}
            for j in range(reach + 1):
                for i in range(n):
                    binding[L.x(i, j)] = seq[step + j][i]
            v = evaluate(phi, binding)
            if not isinstance(v, Fraction):
                exact = False
            if values0 is None:
                values0 = v
            dev = abs(v - values0)
            if dev > worst:
                worst = dev
    deviation = worst if exact and isinstance(worst, Fraction) else _to_float(worst)
    return DiscreteCheck(deviation, exact, N, trials)


def _to_float(v) -> float:
    try:
        return float(v)
    except OverflowError:
        return float("inf")


def _too_large(v) -> bool:
    return isinstance(v, Fraction) and max(v.numerator.bit_length(), v.denominator.bit_length()) > 2048


def _round(v) -> Fraction:
    with mpmath.workdps(50):
        return Fraction(mpmath.nstr(mpmath.mpf(v.numerator) / v.denominator, 50))


def _as_exact(v):
    if isinstance(v, Fraction):
        return as_expr(v)
    if isinstance(v, mpmath.mpf):
        return as_expr(Fraction(float(v)))
    return as_expr(Fraction(v))

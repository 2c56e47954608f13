"""Immutable expression nodes and the canonicalising constructors.

Every constructor in this module returns a canonical form: sums and
products are flattened and sorted by a fixed total order, like terms and
like bases are merged, numbers are folded, and products are distributed
over sums.  A power of a sum stays an atom unless its exponent is a positive
integer.  Because of this, two polynomial (or Laurent polynomial)
expressions are equal exactly when their trees are equal.

Powers follow positive-domain rules, ``(x*y)^a = x^a*y^a`` and
``(x^a)^b = x^(a*b)``, which is the setting of every Lagrangian handled
here.
"""

from __future__ import annotations

from fractions import Fraction
from math import floor, gcd, lcm

from varsym.errors import DomainError

NUM, SYM, FN, FUNC, POW, MUL, ADD = range(7)

FUNCTIONS = ("ln", "exp", "sin", "cos")


class Expr:
    __slots__ = ("_hash", "_key", "_free")
    kind = -1

    def _args(self) -> tuple:
        raise NotImplementedError

    def __hash__(self):
        try:
            return self._hash
        except AttributeError:
            h = hash((self.kind,) + self._args())
            self._hash = h
            return h

    def __eq__(self, other):
        if self is other:
            return True
        if isinstance(other, Expr):
            return (
                self.kind == other.kind
                and hash(self) == hash(other)
                and self._args() == other._args()
            )
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.kind == NUM and self.value == other
        return NotImplemented

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    @property
    def sort_key(self) -> tuple:
        try:
            return self._key
        except AttributeError:
            k = self._make_key()
            self._key = k
            return k

    @property
    def free_symbols(self) -> frozenset:
        try:
            return self._free
        except AttributeError:
            f = self._make_free()
            self._free = f
            return f

    def has(self, *symbols) -> bool:
        free = self.free_symbols
        return any(s in free for s in symbols)

    @property
    def is_number(self) -> bool:
        return self.kind == NUM

    # arithmetic sugar; every operator returns a canonical expression
    def __add__(self, other):
        return add(self, as_expr(other))

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, _scale(as_expr(other), Fraction(-1)))

    def __rsub__(self, other):
        return add(as_expr(other), _scale(self, Fraction(-1)))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), MINUS_ONE))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, MINUS_ONE))

    def __pow__(self, other):
        return power(self, as_expr(other))

    def __rpow__(self, other):
        return power(as_expr(other), self)

    def __neg__(self):
        return _scale(self, Fraction(-1))

    def __pos__(self):
        return self

    def __repr__(self):
        from varsym.expr.render import render

        return f"Expr({render(self)!r})"

    def __str__(self):
        from varsym.expr.render import render

        return render(self)


class Num(Expr):
    __slots__ = ("value",)
    kind = NUM

    def __init__(self, value: Fraction):
        self.value = value

    def _args(self):
        return (self.value,)

    def _make_key(self):
        return (NUM, self.value)

    def _make_free(self):
        return frozenset()


class Sym(Expr):
    """A symbol.  ``order`` marks a jet derivative, ``shift`` a discrete offset ``x[k+shift]``."""

    __slots__ = ("name", "order", "shift")
    kind = SYM

    def __init__(self, name: str, order: int = 0, shift: int | None = None):
        self.name = name
        self.order = order
        self.shift = shift

    def _args(self):
        return (self.name, self.order, self.shift)

    def _make_key(self):
        return (SYM, self.name, self.order, self.shift is not None, self.shift or 0)

    def _make_free(self):
        return frozenset((self,))

    def base(self) -> "Sym":
        return sym(self.name)


class Fn(Expr):
    """Undefined function of ``vars`` with partial-derivative multi-index ``derivs``."""

    __slots__ = ("name", "vars", "derivs")
    kind = FN

    def __init__(self, name: str, vars: tuple, derivs: tuple):
        self.name = name
        self.vars = vars
        self.derivs = derivs

    def _args(self):
        return (self.name, self.vars, self.derivs)

    def _make_key(self):
        return (FN, self.name, tuple(v.sort_key for v in self.vars), self.derivs)

    def _make_free(self):
        return frozenset(self.vars)


class Func(Expr):
    __slots__ = ("name", "arg")
    kind = FUNC

    def __init__(self, name: str, arg: Expr):
        self.name = name
        self.arg = arg

    def _args(self):
        return (self.name, self.arg)

    def _make_key(self):
        return (FUNC, self.name, self.arg.sort_key)

    def _make_free(self):
        return self.arg.free_symbols


class Pow(Expr):
    __slots__ = ("base", "exp")
    kind = POW

    def __init__(self, base: Expr, exp: Expr):
        self.base = base
        self.exp = exp

    def _args(self):
        return (self.base, self.exp)

    def _make_key(self):
        return (POW, self.base.sort_key, self.exp.sort_key)

    def _make_free(self):
        return self.base.free_symbols | self.exp.free_symbols


class Mul(Expr):
    """``coeff`` times a sorted tuple of atoms with pairwise distinct bases."""

    __slots__ = ("coeff", "factors")
    kind = MUL

    def __init__(self, coeff: Fraction, factors: tuple):
        self.coeff = coeff
        self.factors = factors

    def _args(self):
        return (self.coeff, self.factors)

    def _make_key(self):
        return (MUL, tuple(f.sort_key for f in self.factors), self.coeff)

    def _make_free(self):
        out = frozenset()
        for f in self.factors:
            out |= f.free_symbols
        return out


class Add(Expr):
    __slots__ = ("terms",)
    kind = ADD

    def __init__(self, terms: tuple):
        self.terms = terms

    def _args(self):
        return (self.terms,)

    def _make_key(self):
        return (ADD, tuple(t.sort_key for t in self.terms))

    def _make_free(self):
        out = frozenset()
        for t in self.terms:
            out |= t.free_symbols
        return out


_small_ints = {i: Num(Fraction(i)) for i in range(-16, 17)}
ZERO = _small_ints[0]
ONE = _small_ints[1]
MINUS_ONE = _small_ints[-1]
HALF = Num(Fraction(1, 2))


def num(value) -> Num:
    if isinstance(value, Num):
        return value
    if isinstance(value, bool) or not isinstance(value, (int, Fraction)):
        raise TypeError(f"exact rational expected, got {type(value).__name__}")
    value = Fraction(value)
    if value.denominator == 1:
        cached = _small_ints.get(value.numerator)
        if cached is not None:
            return cached
    return Num(value)


def sym(name: str, order: int = 0, shift: int | None = None) -> Sym:
    return Sym(name, order, shift)


def fn(name: str, vars, derivs=None) -> Fn:
    vars = tuple(vars)
    if derivs is None:
        derivs = (0,) * len(vars)
    return Fn(name, vars, tuple(derivs))


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return num(x)
    raise TypeError(f"cannot use {type(x).__name__} as an exact expression")


# ---------------------------------------------------------------------------
# terms: coefficient times a sorted tuple of atoms


def _term_parts(e: Expr):
    k = e.kind
    if k == NUM:
        return e.value, ()
    if k == MUL:
        return e.coeff, e.factors
    return Fraction(1), (e,)


def _make_term(coeff: Fraction, factors: tuple) -> Expr:
    if not factors or coeff == 0:
        return num(coeff)
    if coeff == 1 and len(factors) == 1:
        return factors[0]
    return Mul(coeff, factors)


def _term_order(t: Expr):
    k = t.kind
    if k == NUM:
        return (NUM,)
    if k == MUL:
        if len(t.factors) == 1:
            return t.factors[0].sort_key
        return (MUL, tuple(f.sort_key for f in t.factors))
    return t.sort_key


def _factor_key(f: Expr):
    if f.kind == POW:
        return (f.base.sort_key, f.exp.sort_key)
    return (f.sort_key, ONE.sort_key)


def terms_of(e: Expr) -> tuple:
    return e.terms if e.kind == ADD else ((e,) if e != 0 else ())


def base_exp(f: Expr):
    if f.kind == POW:
        return f.base, f.exp
    return f, ONE


def _build_sum(const: Fraction, acc: dict) -> Expr:
    terms = [_make_term(c, fs) for fs, c in acc.items() if c != 0]
    terms.sort(key=_term_order)
    if const != 0:
        terms.insert(0, num(const))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    return Add(tuple(terms))


def _accumulate(acc: dict, e: Expr, const: Fraction) -> Fraction:
    for t in terms_of(e):
        c, fs = _term_parts(t)
        if fs:
            acc[fs] = acc.get(fs, 0) + c
        else:
            const += c
    return const


def add(*args) -> Expr:
    acc: dict = {}
    const = Fraction(0)
    for a in args:
        const = _accumulate(acc, as_expr(a), const)
    return _build_sum(const, acc)


def _scale(e: Expr, c: Fraction) -> Expr:
    if c == 1:
        return e
    if c == 0:
        return ZERO
    k = e.kind
    if k == NUM:
        return num(e.value * c)
    if k == ADD:
        return Add(tuple(_make_term(tc * c, fs) for tc, fs in map(_term_parts, e.terms)))
    tc, fs = _term_parts(e)
    return _make_term(tc * c, fs)


def mul(*args) -> Expr:
    result = ONE
    for a in args:
        result = _mul2(result, as_expr(a))
        if result.kind == NUM and result.value == 0:
            return ZERO
    return result


def _mul2(a: Expr, b: Expr) -> Expr:
    if a.kind == NUM:
        return _scale(b, a.value)
    if b.kind == NUM:
        return _scale(a, b.value)
    if a.kind == ADD or b.kind == ADD:
        if b.kind != ADD or (a.kind == ADD and _holds_sum_power(b) and not _holds_sum_power(a)):
            a, b = b, a
        acc: dict = {}
        const = Fraction(0)
        for x in terms_of(a):
            m = _absorb_sum(b, x) if _holds_sum_power(x) else None
            if m is not None:
                const = _accumulate(acc, m, const)
                continue
            for y in terms_of(b):
                const = _accumulate(acc, _mul_terms(x, y), const)
        return _build_sum(const, acc)
    return _mul_terms(a, b)


def _holds_sum_power(e: Expr) -> bool:
    if e.kind == ADD:
        return any(_holds_sum_power(t) for t in e.terms)
    _, fs = _term_parts(e)
    return any(f.kind == POW and f.base.kind == ADD and _negative_exp(f) for f in fs)


def _negative_exp(f: Expr) -> bool:
    return f.exp.kind == NUM and f.exp.value < 0


def _absorb_sum(s: Expr, other: Expr):
    """Multiply the sum ``s`` into a term holding a power of the same sum.

    Returns None when ``other`` has no such factor, in which case the caller
    distributes as usual.
    """
    if other.kind not in (POW, MUL):
        return None
    c = content(s)
    for sign in (1, -1):
        base = _scale(s, Fraction(sign) / c)
        oc, ofs = _term_parts(other)
        if any(f.kind == POW and f.base == base and _negative_exp(f) for f in ofs):
            return _scale(_combine(oc, ofs + (base,)), c * sign)
    return None


def _mul_terms(x: Expr, y: Expr) -> Expr:
    cx, fx = _term_parts(x)
    cy, fy = _term_parts(y)
    return _combine(cx * cy, fx + fy)


def _combine(coeff: Fraction, factors: tuple) -> Expr:
    """Multiply a coefficient by canonical atoms, merging equal bases."""
    powers: dict = {}
    exp_arg = None
    merged = False
    for f in factors:
        if f.kind == FUNC and f.name == "exp":
            if exp_arg is None:
                exp_arg = f.arg
            else:
                exp_arg = add(exp_arg, f.arg)
                merged = True
            continue
        base, e = base_exp(f)
        prev = powers.get(base)
        if prev is None:
            powers[base] = e
        else:
            powers[base] = add(prev, e)
            merged = True
    if not merged:
        return _make_term(coeff, tuple(sorted(factors, key=_factor_key)))

    atoms: list = []
    sums: list = []
    num_powers: dict = {}

    def classify(f: Expr):
        nonlocal coeff
        k = f.kind
        if k == NUM:
            coeff *= f.value
        elif k == MUL:
            coeff *= f.coeff
            for g in f.factors:
                classify(g)
        elif k == ADD:
            sums.append(f)
        elif k == POW and f.base.kind == NUM:
            prev = num_powers.get(f.base)
            num_powers[f.base] = f.exp if prev is None else add(prev, f.exp)
        else:
            atoms.append(f)

    if exp_arg is not None:
        classify(func("exp", exp_arg))
    for base, e in powers.items():
        if base.kind == NUM:
            prev = num_powers.get(base)
            num_powers[base] = e if prev is None else add(prev, e)
        else:
            classify(power(base, e))
    for base, e in num_powers.items():
        p = _num_power(base.value, e)
        if p.kind == NUM:
            coeff *= p.value
        elif p.kind == MUL:
            coeff *= p.coeff
            atoms.extend(p.factors)
        else:
            atoms.append(p)
    if coeff == 0:
        return ZERO
    result = _make_term(coeff, tuple(sorted(atoms, key=_factor_key)))
    for s in sums:
        result = _mul2(result, s)
    return result


# ---------------------------------------------------------------------------
# powers


def _iroot(n: int, r: int):
    if n < 2:
        return n
    try:
        guess = int(round(n ** (1.0 / r)))
    except OverflowError:
        return None
    for cand in (guess - 1, guess, guess + 1):
        if cand >= 0 and cand**r == n:
            return cand
    return None


def _exact_root(q: Fraction, r: int):
    a = _iroot(q.numerator, r)
    if a is None:
        return None
    b = _iroot(q.denominator, r)
    if b is None:
        return None
    return Fraction(a, b)


def _num_power(q: Fraction, e: Expr) -> Expr:
    if e.kind != NUM:
        if q == 1:
            return ONE
        return Pow(num(q), e)
    ev = e.value
    if ev == 0:
        return ONE
    if ev.denominator == 1:
        if q == 0 and ev < 0:
            raise DomainError("division by zero")
        return num(q ** ev.numerator)
    if q == 0:
        if ev < 0:
            raise DomainError("division by zero")
        return ZERO
    if q == 1:
        return ONE
    if q < 0:
        return Pow(num(q), e)
    root = _exact_root(q, ev.denominator)
    if root is not None:
        return num(root**ev.numerator)
    whole = floor(ev)
    frac = ev - whole
    atom = Pow(num(q), num(frac))
    scale = q**whole
    return atom if scale == 1 else Mul(scale, (atom,))


def content(e: Expr) -> Fraction:
    """Positive rational c with e/c having coprime integer coefficients."""
    nums = 0
    dens = 1
    for t in terms_of(e):
        c, _ = _term_parts(t)
        nums = gcd(nums, c.numerator)
        dens = lcm(dens, c.denominator)
    if nums == 0:
        return Fraction(1)
    return Fraction(nums, dens)


def _common_factor(b: Add):
    """Largest product of atoms dividing every term of ``b`` (None if trivial)."""
    shared = None
    for t in b.terms:
        _, fs = _term_parts(t)
        here = {}
        for f in fs:
            base, x = base_exp(f)
            if x.kind == NUM:
                here[base] = x.value
        if shared is None:
            shared = here
        else:
            shared = {k: min(v, here[k]) for k, v in shared.items() if k in here}
        if not shared:
            return None
    parts = [power(k, num(v)) for k, v in shared.items() if v != 0]
    if not parts:
        return None
    return mul(*parts)


def _sum_power(b: Add, e: Expr) -> Expr:
    if e.kind != NUM:
        return Pow(b, e)
    ev = e.value
    if ev.denominator == 1 and ev > 0:
        n = ev.numerator
        result = ONE
        sq = b
        while n:
            if n & 1:
                result = _mul2(result, sq)
            n >>= 1
            if n:
                sq = _mul2(sq, sq)
        return result
    common = _common_factor(b)
    if common is not None:
        rest = add(*(_mul2(t, power(common, MINUS_ONE)) for t in b.terms))
        return _mul2(power(common, e), power(rest, e))
    c = content(b)
    if ev.denominator == 1 and _term_parts(b.terms[0])[0] < 0:
        c = -c
    if c != 1:
        b = _scale(b, 1 / c)
    if ev > 1:
        whole = floor(ev)
        node = _mul2(_sum_power(b, num(whole)), Pow(b, num(ev - whole)))
    else:
        node = Pow(b, e)
    if c == 1:
        return node
    return _mul2(_num_power(c, e), node)


def power(b, e) -> Expr:
    b = as_expr(b)
    e = as_expr(e)
    if e.kind == NUM:
        if e.value == 0:
            return ONE
        if e.value == 1:
            return b
    k = b.kind
    if k == NUM:
        return _num_power(b.value, e)
    if k == FUNC and b.name == "exp":
        return func("exp", mul(e, b.arg))
    if k == POW:
        return power(b.base, mul(b.exp, e))
    if k == MUL:
        return mul(_num_power(b.coeff, e), *(power(f, e) for f in b.factors))
    if k == ADD:
        return _sum_power(b, e)
    return Pow(b, e)


# ---------------------------------------------------------------------------
# elementary functions


def _leading_negative(e: Expr) -> bool:
    first = terms_of(e)[0] if e != 0 else ZERO
    return _term_parts(first)[0] < 0


def func(name: str, arg) -> Expr:
    arg = as_expr(arg)
    if name == "sqrt":
        return power(arg, HALF)
    if name == "exp":
        if arg == 0:
            return ONE
        if arg.kind == FUNC and arg.name == "ln":
            return arg.arg
        return Func("exp", arg)
    if name == "ln":
        if arg.kind == NUM:
            if arg.value <= 0:
                raise DomainError(f"ln of non-positive number {arg.value}")
            if arg.value == 1:
                return ZERO
            return Func("ln", arg)
        if arg.kind == FUNC and arg.name == "exp":
            return arg.arg
        if arg.kind == POW:
            return mul(arg.exp, func("ln", arg.base))
        if arg.kind == MUL and arg.coeff > 0:
            parts = [func("ln", f) for f in arg.factors]
            if arg.coeff != 1:
                parts.append(func("ln", num(arg.coeff)))
            return add(*parts)
        return Func("ln", arg)
    if name == "sin":
        if arg == 0:
            return ZERO
        if _leading_negative(arg):
            return -Func("sin", -arg)
        return Func("sin", arg)
    if name == "cos":
        if arg == 0:
            return ONE
        if _leading_negative(arg):
            return Func("cos", -arg)
        return Func("cos", arg)
    raise ValueError(f"unknown function {name!r}")


def ln(x) -> Expr:
    return func("ln", x)


def exp(x) -> Expr:
    return func("exp", x)


def sin(x) -> Expr:
    return func("sin", x)


def cos(x) -> Expr:
    return func("cos", x)


def sqrt(x) -> Expr:
    return power(x, HALF)


def rebuild(e: Expr, children: list) -> Expr:
    """Reassemble ``e`` from transformed children (same order as :func:`children`)."""
    k = e.kind
    if k == FUNC:
        return func(e.name, children[0])
    if k == POW:
        return power(children[0], children[1])
    if k == MUL:
        return mul(num(e.coeff), *children)
    if k == ADD:
        return add(*children)
    return e


def children(e: Expr) -> tuple:
    k = e.kind
    if k == FUNC:
        return (e.arg,)
    if k == POW:
        return (e.base, e.exp)
    if k == MUL:
        return e.factors
    if k == ADD:
        return e.terms
    return ()


def preorder(e: Expr):
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))

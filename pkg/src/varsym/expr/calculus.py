"""Partial differentiation and simultaneous substitution."""

from __future__ import annotations

from functools import lru_cache

from varsym.expr.core import (
    ADD,
    FN,
    FUNC,
    MUL,
    ONE,
    POW,
    SYM,
    ZERO,
    Expr,
    Fn,
    add,
    as_expr,
    children,
    cos,
    func,
    ln,
    mul,
    num,
    power,
    preorder,
    rebuild,
    sin,
)


def diff_partial(e: Expr, s) -> Expr:
    """Partial derivative of ``e`` with respect to the symbol ``s``.

    All symbols, including jet symbols of different orders, are independent.
    """
    if s.kind != SYM:
        raise TypeError("can only differentiate with respect to a symbol")
    return _diff(as_expr(e), s)


@lru_cache(maxsize=1 << 16)
def _diff(e: Expr, s) -> Expr:
    if s not in e.free_symbols:
        return ZERO
    k = e.kind
    if k == SYM:
        return ONE
    if k == FN:
        i = e.vars.index(s)
        derivs = list(e.derivs)
        derivs[i] += 1
        return Fn(e.name, e.vars, tuple(derivs))
    if k == ADD:
        return add(*(_diff(t, s) for t in e.terms))
    if k == MUL:
        parts = []
        fs = e.factors
        for i, f in enumerate(fs):
            d = _diff(f, s)
            if d != 0:
                parts.append(mul(num(e.coeff), d, *fs[:i], *fs[i + 1 :]))
        return add(*parts)
    if k == POW:
        b, x = e.base, e.exp
        if s not in x.free_symbols:
            return mul(x, power(b, x - 1), _diff(b, s))
        return mul(e, add(mul(_diff(x, s), ln(b)), mul(x, _diff(b, s), power(b, -1))))
    if k == FUNC:
        u = e.arg
        du = _diff(u, s)
        if e.name == "ln":
            return mul(du, power(u, -1))
        if e.name == "exp":
            return mul(e, du)
        if e.name == "sin":
            return mul(cos(u), du)
        if e.name == "cos":
            return mul(-1, sin(u), du)
    raise TypeError(f"cannot differentiate {e!r}")


def substitute(e: Expr, mapping: dict) -> Expr:
    """Simultaneously replace symbols (or undefined functions) and re-canonicalise.

    Keys may be :class:`Sym` or undefined-function nodes; a derivative of a
    replaced undefined function is replaced by the matching derivative of the
    replacement.
    """
    e = as_expr(e)
    mapping = {k: as_expr(v) for k, v in mapping.items()}
    if not mapping:
        return e
    sym_keys = {k for k in mapping if k.kind == SYM}
    fn_keys = {(k.name, k.vars): v for k, v in mapping.items() if k.kind == FN and not any(k.derivs)}
    has_fn = bool(fn_keys) or any(k.kind == FN for k in mapping)
    memo: dict = {}

    def walk(node: Expr) -> Expr:
        if not has_fn and not (node.free_symbols & sym_keys):
            return node
        hit = memo.get(node)
        if hit is not None:
            return hit
        k = node.kind
        if k == SYM:
            out = mapping.get(node, node)
        elif k == FN:
            if node in mapping:
                out = mapping[node]
            else:
                repl = fn_keys.get((node.name, node.vars))
                if repl is None:
                    out = _rename_args(node, mapping)
                else:
                    out = repl
                    for v, count in zip(node.vars, node.derivs):
                        for _ in range(count):
                            out = _diff(out, v)
        else:
            kids = children(node)
            new = [walk(c) for c in kids]
            if all(a is b for a, b in zip(new, kids)):
                out = node
            else:
                out = rebuild(node, new)
        memo[node] = out
        return out

    return walk(e)


def _rename_args(node: Fn, mapping: dict) -> Expr:
    """Rename the argument symbols of an undefined function.

    Only symbol-to-symbol renaming is representable; anything else would need
    a composite function and is refused rather than silently ignored.
    """
    new = tuple(mapping.get(v, v) for v in node.vars)
    if new == node.vars:
        return node
    if any(v.kind != SYM for v in new) or len(set(new)) != len(new):
        raise ValueError(f"cannot substitute into the arguments of the undefined function {node.name}")
    return Fn(node.name, new, node.derivs)


def fn_atoms(e: Expr) -> set:
    return {n for n in preorder(e) if n.kind == FN}


def func_atoms(e: Expr) -> set:
    return {n for n in preorder(e) if n.kind == FUNC}


__all__ = ["diff_partial", "substitute", "fn_atoms", "func_atoms", "func"]

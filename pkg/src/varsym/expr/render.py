"""Text, LaTeX and JSON renderings of canonical expressions."""

from __future__ import annotations

import json
import re
from fractions import Fraction

from varsym.expr.core import (
    ADD,
    FN,
    FUNC,
    MUL,
    NUM,
    POW,
    SYM,
    Expr,
    Pow,
    _term_parts,
    add,
    base_exp,
    fn,
    func,
    mul,
    num,
    power,
    sym,
)

_P_ADD, _P_NEG, _P_MUL, _P_POW, _P_ATOM = 10, 15, 20, 40, 100


def render(e: Expr, fmt: str = "text") -> str:
    if fmt == "text":
        return _text(e)[0]
    if fmt == "latex":
        return _latex(e)[0]
    if fmt == "json":
        return json.dumps(to_json(e), sort_keys=True)
    raise ValueError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# text


def symbol_text(s) -> str:
    if s.shift is not None:
        if s.shift == 0:
            return f"{s.name}[k]"
        sign = "+" if s.shift > 0 else "-"
        return f"{s.name}[k{sign}{abs(s.shift)}]"
    if s.order == 0:
        return s.name
    if s.order <= 3:
        return s.name + "'" * s.order
    return f"{s.name}^({s.order})"


def _frac_text(q: Fraction) -> tuple[str, int]:
    if q.denominator == 1:
        return str(q.numerator), (_P_NEG if q < 0 else _P_ATOM)
    return f"{q.numerator}/{q.denominator}", (_P_NEG if q < 0 else _P_MUL)


def _wrap(s: str, prec: int, need: int) -> str:
    return f"({s})" if prec < need else s


def _text(e: Expr) -> tuple[str, int]:
    k = e.kind
    if k == NUM:
        return _frac_text(e.value)
    if k == SYM:
        return symbol_text(e), _P_ATOM
    if k == FN:
        if any(v.shift is not None for v in e.vars):
            # shifted arguments differ between copies of the same function: show them
            args = ", ".join(symbol_text(v) for v in e.vars)
            sub = "".join(f"[{i}]" * c for i, c in enumerate(e.derivs))
            return f"{e.name}{'_' + sub if sub else ''}({args})", _P_ATOM
        if not any(e.derivs):
            return e.name, _P_ATOM
        sub = "".join(v.name * c for v, c in zip(e.vars, e.derivs))
        return f"{e.name}_{sub}", _P_ATOM
    if k == FUNC:
        return f"{e.name}({_text(e.arg)[0]})", _P_ATOM
    if k == ADD:
        parts = []
        for i, t in enumerate(e.terms):
            c, _ = _term_parts(t)
            if i == 0:
                parts.append(_text(t)[0])
            elif c < 0:
                parts.append(" - " + _wrap(*_text(-t), _P_MUL))
            else:
                parts.append(" + " + _text(t)[0])
        return "".join(parts), _P_ADD
    if k == POW and not (e.exp.kind == NUM and e.exp.value < 0):
        return _pow_text(e.base, e.exp), _P_POW
    return _product_text(e)


def _pow_text(b: Expr, x: Expr) -> str:
    bs, bp = _text(b)
    base = _wrap(bs, bp, _P_ATOM)
    if x.kind == NUM and x.value.denominator == 1 and x.value > 0:
        return f"{base}^{x.value.numerator}"
    if x.kind == SYM and x.order == 0 and x.shift is None:
        return f"{base}^{x.name}"
    return f"{base}^({_text(x)[0]})"


def _product_text(e: Expr) -> tuple[str, int]:
    coeff, factors = _term_parts(e)
    sign = "-" if coeff < 0 else ""
    c = abs(coeff)
    numer, denom = [], []
    if c.numerator != 1:
        numer.append(str(c.numerator))
    if c.denominator != 1:
        denom.append(str(c.denominator))
    for f in factors:
        b, x = base_exp(f)
        if x.kind == NUM and x.value < 0:
            denom.append(_factor_text(Pow(b, num(-x.value))) if x.value != -1 else _factor_text(b))
        else:
            numer.append(_factor_text(f))
    top = "*".join(numer) or "1"
    if denom:
        bottom = denom[0] if len(denom) == 1 else "(" + "*".join(denom) + ")"
        text = f"{top}/{bottom}"
    else:
        text = top
    return sign + text, (_P_NEG if sign else _P_MUL)


def _factor_text(f: Expr) -> str:
    s, p = _text(f)
    return _wrap(s, p, _P_MUL + 1) if f.kind != NUM else s


# ---------------------------------------------------------------------------
# LaTeX


_NAME_RE = re.compile(r"^([A-Za-z]+)_?(\d+)$")


def _latex_name(name: str) -> str:
    m = _NAME_RE.match(name)
    if m:
        return f"{m.group(1)}_{{{m.group(2)}}}"
    if len(name) > 1:
        return rf"\mathrm{{{name}}}"
    return name


def symbol_latex(s) -> str:
    base = _latex_name(s.name)
    if s.shift is not None:
        idx = "k" if s.shift == 0 else f"k{'+' if s.shift > 0 else '-'}{abs(s.shift)}"
        return f"{s.name}_{{{idx}}}" if "_" not in base else f"{base}({idx})"
    if s.order == 0:
        return base
    if s.order <= 3:
        accent = {1: r"\dot", 2: r"\ddot", 3: r"\dddot"}[s.order]
        return f"{accent}{{{base}}}"
    return f"{base}^{{({s.order})}}"


def _latex_frac(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    sign = "-" if q < 0 else ""
    return rf"{sign}\frac{{{abs(q.numerator)}}}{{{q.denominator}}}"


def _latex(e: Expr) -> tuple[str, int]:
    k = e.kind
    if k == NUM:
        s = _latex_frac(e.value)
        return s, (_P_NEG if e.value < 0 else _P_ATOM)
    if k == SYM:
        return symbol_latex(e), _P_ATOM
    if k == FN:
        args = ",".join(_latex_name(v.name) for v in e.vars)
        if not any(e.derivs):
            return f"{e.name}({args})", _P_ATOM
        sub = "".join(_latex_name(v.name) * c for v, c in zip(e.vars, e.derivs))
        return f"{e.name}_{{{sub}}}", _P_ATOM
    if k == FUNC:
        arg = _latex(e.arg)[0]
        if e.name == "exp":
            return f"e^{{{arg}}}", _P_POW
        return rf"\{e.name}\left({arg}\right)", _P_ATOM
    if k == ADD:
        parts = []
        for i, t in enumerate(e.terms):
            c, _ = _term_parts(t)
            if i == 0:
                parts.append(_latex(t)[0])
            elif c < 0:
                parts.append(" - " + _latex(-t)[0])
            else:
                parts.append(" + " + _latex(t)[0])
        return "".join(parts), _P_ADD
    if k == POW and not (e.exp.kind == NUM and e.exp.value < 0):
        return _pow_latex(e.base, e.exp), _P_POW
    coeff, factors = _term_parts(e)
    sign = "-" if coeff < 0 else ""
    c = abs(coeff)
    numer, denom = [], []
    if c.numerator != 1:
        numer.append(str(c.numerator))
    if c.denominator != 1:
        denom.append(str(c.denominator))
    for f in factors:
        b, x = base_exp(f)
        target = numer
        if x.kind == NUM and x.value < 0:
            target = denom
            f = Pow(b, num(-x.value)) if x.value != -1 else b
        s, p = _latex(f)
        target.append(rf"\left({s}\right)" if p <= _P_MUL and f.kind != NUM else s)
    top = " ".join(numer) or "1"
    if denom:
        return rf"{sign}\frac{{{top}}}{{{' '.join(denom)}}}", _P_MUL
    return sign + top, (_P_NEG if sign else _P_MUL)


def _pow_latex(b: Expr, x: Expr) -> str:
    bs, bp = _latex(b)
    if x.kind == NUM and x.value == Fraction(1, 2):
        return rf"\sqrt{{{bs}}}"
    if bp < _P_ATOM or (b.kind == SYM and b.order > 3):
        bs = rf"\left({bs}\right)"
    return f"{bs}^{{{_latex(x)[0]}}}"


# ---------------------------------------------------------------------------
# JSON


def to_json(e: Expr) -> dict:
    k = e.kind
    if k == NUM:
        return {"op": "num", "value": str(e.value)}
    if k == SYM:
        out = {"op": "sym", "name": e.name, "order": e.order}
        if e.shift is not None:
            out["shift"] = e.shift
        return out
    if k == FN:
        return {
            "op": "fn",
            "name": e.name,
            "vars": [to_json(v) for v in e.vars],
            "derivs": list(e.derivs),
        }
    if k == FUNC:
        return {"op": e.name, "args": [to_json(e.arg)]}
    if k == POW:
        return {"op": "pow", "args": [to_json(e.base), to_json(e.exp)]}
    if k == MUL:
        args = [to_json(f) for f in e.factors]
        if e.coeff != 1:
            args.insert(0, to_json(num(e.coeff)))
        return {"op": "mul", "args": args}
    return {"op": "add", "args": [to_json(t) for t in e.terms]}


def from_json(data) -> Expr:
    if isinstance(data, str):
        data = json.loads(data)
    op = data["op"]
    if op == "num":
        return num(Fraction(data["value"]))
    if op == "sym":
        return sym(data["name"], data.get("order", 0), data.get("shift"))
    if op == "fn":
        return fn(data["name"], [from_json(v) for v in data["vars"]], data["derivs"])
    args = [from_json(a) for a in data["args"]]
    if op == "add":
        return add(*args)
    if op == "mul":
        return mul(*args)
    if op == "pow":
        return power(*args)
    return func(op, args[0])

import random
from pathlib import Path

import pytest
import sympy as sp

from varsym.expr import to_json

PROBLEMS = Path(__file__).resolve().parents[1] / "problems"


def sym_name(name, order=0, shift=None):
    if shift is not None:
        return f"{name}__s{shift}"
    return f"{name}__d{order}" if order else name


def to_sympy(e):
    """Independent translation of an expression tree into sympy."""
    return _tree(to_json(e))


def _tree(d):
    op = d["op"]
    if op == "num":
        return sp.Rational(d["value"])
    if op == "sym":
        return sp.Symbol(sym_name(d["name"], d.get("order", 0), d.get("shift")))
    args = [_tree(a) for a in d.get("args", [])]
    if op == "add":
        return sp.Add(*args)
    if op == "mul":
        return sp.Mul(*args)
    if op == "pow":
        return sp.Pow(*args)
    return {"ln": sp.log, "exp": sp.exp, "sin": sp.sin, "cos": sp.cos, "sqrt": sp.sqrt}[op](args[0])


def sympy_zero(e) -> bool:
    return sp.simplify(to_sympy(e)) == 0


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def problems():
    return PROBLEMS


# ---------------------------------------------------------------------------
# acceptance summary: one line per criterion

CRITERIA = {
    1: "Euler-Lagrange golden outputs",
    2: "symmetry family dimensions and span membership",
    3: "conservation-law golden outputs",
    4: "symbolic and numeric verification",
    5: "Thomas-Fermi negative result",
    6: "randomized property suites",
    7: "discrete suite",
    8: "end-to-end CLI pipelines",
}
_criterion_of = {}
_verdicts = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            _criterion_of[item.nodeid] = mark.args[0]


def pytest_runtest_logreport(report):
    n = _criterion_of.get(report.nodeid)
    if n is None:
        return
    if report.when != "call" and report.outcome == "passed":
        return
    name = report.nodeid.split("::")[-1]
    if hasattr(report, "wasxfail"):
        ok, note = False, f"{name}: {report.wasxfail}"
    else:
        ok, note = report.outcome == "passed", name
    _verdicts.setdefault(n, []).append((ok, note))


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_verdicts):
        results = _verdicts[n]
        passed = sum(ok for ok, _ in results)
        verdict = "PASS" if passed == len(results) else "FAIL"
        tr.write_line(f"criterion {n}: {verdict} ({passed}/{len(results)} checks) {CRITERIA[n]}")
        for ok, note in results:
            if not ok:
                tr.write_line(f"    failed: {note}")

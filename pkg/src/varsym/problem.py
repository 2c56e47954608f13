"""Problem files: a small TOML document describing one variational problem.

Example::

    kind = "continuous"
    lagrangian = "t*x'^2"
    variables = ["x"]

    [ansatz]
    degree = 2

    [constants]
    C1 = 1

    [numeric]
    horizon = 5
    ic = { t0 = 1, x = 1, "x'" = 1 }
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from varsym.errors import ParseError, ValidationError

KINDS = ("continuous", "discrete")
KNOWN_KEYS = {"kind", "lagrangian", "variables", "parameters", "order", "ansatz", "generators",
              "constants", "numeric", "discrete", "name", "description", "interval"}


def number(v):
    """Ints, floats and rational strings like ``"1/2"`` to Fraction (floats stay float)."""
    if isinstance(v, bool):
        raise ValidationError(f"expected a number, got {v!r}")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        return v
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except ValueError:
            raise ValidationError(f"expected a number, got {v!r}") from None
    raise ValidationError(f"expected a number, got {v!r}")


def _names(v, key: str) -> list:
    if v is None:
        return []
    if isinstance(v, str):
        return [s.strip() for s in v.split(",") if s.strip()]
    if isinstance(v, list) and all(isinstance(s, str) for s in v):
        return list(v)
    raise ValidationError(f"{key} must be a list of names")


@dataclass
class Problem:
    kind: str
    lagrangian: str
    variables: list
    parameters: list = field(default_factory=list)
    order: int | None = None
    ansatz_degree: int | None = None
    ansatz_atoms: list | None = None
    generators: dict | None = None  # {"T": str, "X": [str]} or {"X": [str]}
    constants: dict = field(default_factory=dict)
    ic: dict = field(default_factory=dict)
    horizon: float = 10.0
    tolerance: float = 1e-6
    steps: int = 50
    trials: int = 5
    params: dict = field(default_factory=dict)
    trajectory: dict = field(default_factory=dict)  # closed-form extremal, name -> expression text
    name: str = ""

    @classmethod
    def from_dict(cls, data: dict, name: str = "") -> "Problem":
        unknown = set(data) - KNOWN_KEYS
        if unknown:
            raise ValidationError(f"unknown problem keys: {sorted(unknown)}")
        kind = data.get("kind", "continuous")
        if kind not in KINDS:
            raise ValidationError(f"kind must be one of {KINDS}, got {kind!r}")
        if not isinstance(data.get("lagrangian"), str):
            raise ValidationError("a problem needs a 'lagrangian' string")
        variables = _names(data.get("variables"), "variables")
        if not variables:
            raise ValidationError("a problem needs at least one entry in 'variables'")
        order = data.get("order")
        if order is not None and not isinstance(order, int):
            raise ValidationError("order must be an integer")
        ansatz = data.get("ansatz", {})
        gens = data.get("generators")
        if gens is not None:
            X = gens.get("X")
            if isinstance(X, str):
                X = [X]
            gens = {"T": str(gens.get("T", "0")), "X": [str(x) for x in X or []]}
        numeric = data.get("numeric", {})
        discrete = data.get("discrete", {})
        ic = {str(k): number(v) for k, v in numeric.get("ic", {}).items()}
        params = {str(k): number(v) for k, v in numeric.get("params", {}).items()}
        params.update({str(k): number(v) for k, v in discrete.get("params", {}).items()})
        return cls(
            kind=kind,
            lagrangian=data["lagrangian"],
            variables=variables,
            parameters=_names(data.get("parameters"), "parameters"),
            order=order,
            ansatz_degree=ansatz.get("degree"),
            ansatz_atoms=ansatz.get("atoms"),
            generators=gens,
            constants={str(k): number(v) for k, v in data.get("constants", {}).items()},
            ic=ic,
            horizon=float(numeric.get("horizon", 10.0)),
            tolerance=float(numeric.get("tolerance", 1e-6)),
            steps=int(discrete.get("N", 50)),
            trials=int(discrete.get("trials", 5)),
            params=params,
            trajectory={str(k): str(v) for k, v in numeric.get("trajectory", {}).items()},
            name=name or str(data.get("name", "")),
        )

    @classmethod
    def load(cls, path) -> "Problem":
        path = Path(path)
        try:
            data = tomllib.loads(path.read_text())
        except tomllib.TOMLDecodeError as err:
            raise ParseError(f"{path}: {err}") from None
        return cls.from_dict(data, path.stem)

    def numeric_bindings(self) -> dict:
        """Initial conditions merged with parameter values, as verify_numeric expects."""
        out = dict(self.params)
        out.update(self.ic)
        return out

"""Variational calculus toolkit: Euler-Lagrange equations, variational
symmetries found by an ansatz, and Noether conservation laws, for continuous
and discrete time."""

from varsym.discrete import (
    DiscreteGenerator,
    DiscreteLagrangian,
    discrete_euler_lagrange,
    discrete_invariance_residual,
    discrete_noether,
    discrete_solve_generators,
    discrete_verify,
)
from varsym.errors import VarsymError
from varsym.expr import parse, render
from varsym.jet import JetContext, total_derivative
from varsym.noether import conservation_law, psi_sequence, verify_numeric, verify_symbolic
from varsym.symmetry import (
    AnsatzSpec,
    GeneratorTuple,
    determining_residual,
    p_sequence,
    solve_generators,
)
from varsym.variational import Lagrangian, euler_lagrange

__version__ = "0.1.0"

__all__ = [
    "AnsatzSpec", "DiscreteGenerator", "DiscreteLagrangian", "GeneratorTuple", "JetContext",
    "Lagrangian", "VarsymError", "conservation_law", "determining_residual",
    "discrete_euler_lagrange", "discrete_invariance_residual", "discrete_noether",
    "discrete_solve_generators", "discrete_verify", "euler_lagrange", "p_sequence", "parse",
    "psi_sequence", "render", "solve_generators", "total_derivative", "verify_numeric",
    "verify_symbolic",
]

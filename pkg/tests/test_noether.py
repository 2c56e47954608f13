from fractions import Fraction

import pytest

from varsym.errors import IntegrationError, ReductionError
from varsym.expr import add, is_zero, mul, parse, sym
from varsym.noether import (
    ConservationLaw,
    conservation_law,
    on_trajectory,
    psi_sequence,
    reduction_rules,
    verify_numeric,
    verify_symbolic,
)
from varsym.symmetry import GeneratorTuple, solve_generators, zero_generator
from varsym.variational import Lagrangian

from test_symmetry import EMDEN, WEIGHTED, HIGHER, KEPLER, OSC, THOMAS, lag


def test_psi_sequence():
    assert psi_sequence(Lagrangian.from_text("x'^2", "x"))[1] == [parse("2*x'")]
    assert psi_sequence(lag(KEPLER))[1] == [parse("m*q1'"), parse("m*q2'")]
    psi = psi_sequence(lag(HIGHER))
    assert psi[2] == [parse("0"), parse("2*x2''")]
    assert psi[1] == [parse("2*x1'"), parse("-2*x2'''")]


def test_cyclic_momentum():
    L = Lagrangian.from_text("x'^2", "x")
    law = conservation_law(L, GeneratorTuple.from_text("0", ["1"]))
    assert law.phi == parse("2*x'")
    assert law.warning is None


def test_laws_match_displays():
    law = conservation_law(lag(EMDEN), GeneratorTuple.from_text("-6*t", ["3*x"]))
    assert law.phi == parse("t^2*(3*x*x' + 3*x'^2*t + t*x^6)")
    law = conservation_law(lag(OSC), GeneratorTuple.from_text("1", ["-a*x/(2*m)"]))
    assert law.phi == parse("-1/2*exp(a*t/m)*(a*x*x' + m*x'^2 + k*x^2)")
    law = conservation_law(lag(KEPLER), solve_generators(lag(KEPLER)).general())
    assert law.phi == parse("C2*m*(q2*q1' - q1*q2') - C1*m/2*(q1'^2 + q2'^2) + C1*K/sqrt(q1^2 + q2^2)")


def test_weighted_kinetic_law_is_twice_the_display():
    # the assembly formula gives 2*(x t x' - t^2 x'^2 ln t); the factor comes from dL/dx' = 2 t x'
    law = conservation_law(lag(WEIGHTED), GeneratorTuple.from_text("2*t*ln(t)", ["x"]))
    display = parse("x*t*x' - t^2*x'^2*ln(t)")
    assert law.phi == mul(2, display)
    assert on_trajectory(law.phi, lag(WEIGHTED).ctx, {"x": parse("C1 + C2*ln(t)")}) == parse("2*C1*C2")


def test_zero_generator_gives_zero_law():
    law = conservation_law(lag(THOMAS), zero_generator(1))
    assert law.phi == 0 and law.text() == "0 = const"
    assert verify_symbolic(lag(THOMAS), law) == 0


def test_non_symmetry_warns():
    law = conservation_law(lag(THOMAS), GeneratorTuple.from_text("1", ["0"]))
    assert law.warning is not None
    assert law.to_dict()["warning"] == law.warning


def test_linearity_of_assembly():
    L = lag(HIGHER)
    family = solve_generators(L)
    g1, g2 = family.basis[0], family.basis[3]
    combined = conservation_law(L, g1.scaled(3) + g2.scaled(Fraction(-1, 2))).phi
    parts = add(mul(3, conservation_law(L, g1).phi), mul(Fraction(-1, 2), conservation_law(L, g2).phi))
    assert add(combined, mul(-1, parts)) == 0


def test_reduction_rules():
    rules = reduction_rules(lag(EMDEN))
    assert rules.rules[sym("x", 2)] == parse("-2*x'/t - x^5")
    assert reduction_rules(lag(HIGHER)).top == {"x1": 2, "x2": 4}
    with pytest.raises(ReductionError):
        reduction_rules(Lagrangian.from_text("(x' + y')^2", "x,y"))


@pytest.mark.parametrize("case", [WEIGHTED, KEPLER, HIGHER, EMDEN, OSC])
def test_every_family_law_verifies(case, rng):
    L = lag(case)
    family = solve_generators(L)
    for g in family.basis:
        law = conservation_law(L, g)
        assert is_zero(verify_symbolic(L, law, rng), rng).vanishes


def test_verify_numeric_kepler():
    L = lag(KEPLER)
    law = conservation_law(L, solve_generators(L).general(), ["C1", "C2"])
    ic = {"q1": 1, "q2": 0, "q1'": 0, "q2'": 1, "m": 1, "K": 1}
    check = verify_numeric(L, law, ic, 10)
    assert check.passed and check.drift <= 1e-6
    assert len(check.times) >= 100


def test_verify_numeric_weighted_kinetic():
    L = lag(WEIGHTED)
    law = conservation_law(L, GeneratorTuple.from_text("2*t*ln(t)", ["x"]))
    assert verify_numeric(L, law, {"t0": 1, "x": 1, "x'": 1}, 5).drift <= 1e-6


def test_verify_numeric_flags_non_law():
    L = Lagrangian.from_text("x'^2", "x")
    law = ConservationLaw(parse("x"), 0, zero_generator(1))
    check = verify_numeric(L, law, {"x": 0, "x'": 1}, 5)
    assert not check.passed and check.drift > 0.5


def test_verify_numeric_singular_start():
    L = lag(KEPLER)
    law = conservation_law(L, GeneratorTuple.from_text("1", ["0", "0"]))
    with pytest.raises(IntegrationError):
        verify_numeric(L, law, {"q1": 0, "q2": 0, "q1'": 0, "q2'": 1, "m": 1, "K": 1}, 1)


def test_rational_residual_counts_as_zero():
    # solving for x'' divides by 4*(1 - x); the reduced residual must still vanish
    L = Lagrangian.from_text("x/2 + 2*x^2 + 2*x'^2 - 2*x*x'^2 + 4/3*x^2*x'", "x")
    law = conservation_law(L, GeneratorTuple.from_text("1", ["0"]))
    assert verify_symbolic(L, law) == 0

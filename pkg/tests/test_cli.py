import io
import json


from varsym.cli import EXIT_EMPTY, EXIT_FAILED, EXIT_PARSE, EXIT_VALIDATION, main
from varsym.expr import parse


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    data = json.loads(out)
    assert data["schema"] == 1
    return code, data


def test_el_text_and_json(capsys, problems):
    code, out, _ = run(capsys, "el", problems / "emden_fowler.toml")
    assert code == 0 and "= 0" in out
    code, data = run_json(capsys, "el", problems / "emden_fowler.toml")
    assert data["command"] == "el"
    assert parse(data["equations"][0]) == parse("-2*t*x' - t^2*x'' - t^2*x^5")


def test_inline_lagrangian(capsys):
    code, data = run_json(capsys, "el", "-L", "x'^2/2 - k*x^2/2", "-x", "x", "-p", "k")
    assert code == 0 and parse(data["equations"][0]) == parse("-k*x - x''")


def test_global_flags_before_subcommand(capsys, problems):
    code, out, _ = run(capsys, "--format", "json", "el", problems / "weighted_kinetic.toml")
    assert code == 0 and json.loads(out)["command"] == "el"


def test_symmetries_dimensions(capsys, problems):
    for name, dim in [("weighted_kinetic", 3), ("kepler", 2), ("emden_fowler", 1), ("oscillator", 1)]:
        code, data = run_json(capsys, "symmetries", problems / f"{name}.toml")
        assert code == 0 and data["dimension"] == dim, name
        assert len(data["labels"]) == dim


def test_thomas_fermi_empty_family(capsys, problems):
    code, out, _ = run(capsys, "symmetries", problems / "thomas_fermi.toml")
    assert code == EXIT_EMPTY
    assert "dimension 0" in out and "T = 0, X = 0" in out
    code, out, _ = run(capsys, "symmetries", problems / "thomas_fermi.toml", "--empty-ok")
    assert code == 0
    code, out, _ = run(capsys, "noether", problems / "thomas_fermi.toml")
    assert code == 0 and "0 = const" in out


def test_generators_round_trip(capsys, problems, monkeypatch):
    code, out, _ = run(capsys, "symmetries", problems / "kepler.toml", "--format", "json")
    monkeypatch.setattr("sys.stdin", io.StringIO(out))
    code, data = run_json(capsys, "noether", problems / "kepler.toml", "--generators", "-")
    assert code == 0
    expected = parse("C2*m*(q2*q1' - q1*q2') - C1*m/2*(q1'^2 + q2'^2) + C1*K/sqrt(q1^2 + q2^2)")
    assert parse(data["phi"]) == expected
    assert data["constants"] == ["C1", "C2"]


def test_explicit_generator(capsys, problems):
    code, data = run_json(capsys, "noether", problems / "emden_fowler.toml", "--T=-6*t", "--X", "3*x")
    assert parse(data["phi"]) == parse("t^2*(3*x*x' + 3*x'^2*t + t*x^6)")
    assert data["invariance"] == "zero" and data["warning"] is None


def test_set_fixes_constants(capsys, problems):
    code, data = run_json(capsys, "noether", problems / "kepler.toml", "--set", "C1=0", "--set", "C2=1")
    assert parse(data["phi"]) == parse("m*(q2*q1' - q1*q2')")


def test_verify_passes(capsys, problems):
    for name in ("weighted_kinetic", "kepler", "higher_order", "emden_fowler", "oscillator"):
        code, data = run_json(capsys, "verify", problems / f"{name}.toml")
        assert code == 0 and data["passed"], name
        modes = {c["mode"]: c for c in data["checks"]}
        assert modes["symbolic"]["residual"] == "0"
        assert modes["numeric"]["drift"] <= 1e-6


def test_verify_trajectory(capsys, problems):
    code, data = run_json(capsys, "verify", problems / "weighted_kinetic.toml", "--mode", "symbolic")
    assert parse(data["trajectory"]["phi"]) == parse("2*C1*C2")


def test_verify_tampered_law_fails(capsys, problems):
    code, data = run_json(capsys, "verify", problems / "emden_fowler.toml", "--phi", "t^2*(3*x*x' + t*x^6)")
    assert code == EXIT_FAILED and not data["passed"]


def test_trivial_laws_via_phi(capsys, problems):
    for phi in ("x'*cos(t) + x*sin(t)", "-x'*sin(t) + x*cos(t)"):
        code, data = run_json(capsys, "verify", problems / "trivial.toml", f"--phi={phi}")
        assert code == 0 and data["passed"]


def test_exit_codes(capsys, problems, tmp_path):
    code, _, err = run(capsys, "el", "-L", "t*x'^", "-x", "x")
    assert code == EXIT_PARSE and "parse error" in err
    code, _, err = run(capsys, "el", "-L", "t*y'^2", "-x", "x")
    assert code == EXIT_VALIDATION
    bad = tmp_path / "bad.toml"
    bad.write_text("lagrangian = \n")
    assert run(capsys, "el", bad)[0] == EXIT_PARSE
    assert run(capsys, "el", tmp_path / "missing.toml")[0] == EXIT_VALIDATION
    assert run(capsys, "el", problems / "weighted_kinetic.toml", "--precision", "5")[0] == EXIT_VALIDATION


def test_ansatz_options(capsys, problems):
    code, data = run_json(capsys, "symmetries", problems / "weighted_kinetic.toml", "--ansatz-atom", "exp(t)")
    # without a logarithm the t*ln(t) generator is out of reach
    assert data["dimension"] == 2 and data["ansatz"]["atoms"] == ["exp(t)"]
    code, data = run_json(capsys, "symmetries", problems / "thomas_fermi.toml", "--ansatz-degree", "3", "--empty-ok")
    assert code == 0 and data["dimension"] == 0 and data["ansatz"]["degree"] == 3


def test_discrete_pipeline(capsys, problems, monkeypatch):
    path = problems / "discrete_translation.toml"
    code, data = run_json(capsys, "discrete-el", path)
    assert parse(data["equations"][0]) == parse("2*(x[k+1] - x[k]) - 2*(x[k+2] - x[k+1])")
    code, out, _ = run(capsys, "discrete-symmetries", path, "--format", "json")
    assert json.loads(out)["dimension"] == 1
    monkeypatch.setattr("sys.stdin", io.StringIO(out))
    code, data = run_json(capsys, "discrete-noether", path, "--generators", "-")
    assert parse(data["phi"]) == parse("-2*C1*(x[k+1] - x[k])")
    code, data = run_json(capsys, "discrete-verify", path)
    assert code == 0 and data["exact"] and data["deviation"] == "0" and data["steps"] == 50


def test_discrete_second_order(capsys, problems):
    path = problems / "discrete_second_order.toml"
    code, data = run_json(capsys, "discrete-symmetries", path)
    assert data["dimension"] == 2
    code, data = run_json(capsys, "discrete-verify", path)
    assert code == 0 and data["deviation"] == "0"


def test_discrete_verify_tampered(capsys, problems):
    code, data = run_json(capsys, "discrete-verify", problems / "discrete_translation.toml", "--phi", "x[k]")
    assert code == EXIT_FAILED and not data["passed"]

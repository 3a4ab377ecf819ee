from fractions import Fraction

import pytest

from aimkit.expr import bind_parameters, parse_expression
from aimkit.problem import ProblemError, catalog_names, load_problem, parse_problem, resolve_problem

MINIMAL = """
[problem]
name = toy

[symbols]
eigenvalue = E
variable = x

[expressions]
lambda0 = 2*x
s0 = {s0}

[parameters]
k = 1

[solver]
x0 = {x0}
nmax = 5
nstep = 1
dprec = 30
filter = r
digits = 10
"""


def toy(s0="k - E", x0="1/2", **kw):
    return parse_problem(MINIMAL.format(s0=s0, x0=x0), "toy.aim", kw or None)


def test_catalog_contents():
    assert {"yukawa", "ecsc", "sextic", "qnm", "harmonic"} <= set(catalog_names())


def test_load_shipped_yukawa():
    p = resolve_problem("yukawa")
    assert p.lambda0_text == "2*beta - 2/r"
    assert p.parameters == {"A": 4, "L": 0, "alpha": Fraction(1, 5), "hbar": 1, "m": Fraction(1, 2), "beta": 3}
    assert p.x0 == Fraction(1, 3)
    assert p.eigen == "En" and p.variable == "r"
    assert str(p.lambda0) == "6 - 2/r"
    assert p.label_for(0) == "E00" and p.label_for(2) == "E20"


def test_load_from_path(tmp_path):
    f = tmp_path / "toy.aim"
    f.write_text(MINIMAL.format(s0="k - E", x0="1/2"))
    p = load_problem(f)
    assert p.name == "toy"
    assert p.defaults.nmax == 5
    assert resolve_problem(str(f)).name == "toy"


def test_unbound_symbol_is_named():
    with pytest.raises(ProblemError) as info:
        toy(s0="gamma - E")
    assert any("gamma" in e for e in info.value.errors)


def test_singular_expansion_point():
    with pytest.raises(ProblemError) as info:
        resolve_problem("yukawa", {"x0": 0})
    assert any("singular" in e for e in info.value.errors)


def test_decimal_literal_rejected():
    with pytest.raises(ProblemError) as info:
        toy(s0="1.5 - E")
    assert any("decimal" in e for e in info.value.errors)


def test_errors_are_collected_with_line_numbers():
    text = MINIMAL.format(s0="k - ", x0="1/2").replace("nstep = 1", "nstep = 0")
    with pytest.raises(ProblemError) as info:
        parse_problem(text, "bad.aim")
    errs = info.value.errors
    assert len(errs) >= 2
    assert any("line" in e for e in errs)


def test_override_parameters_and_solver():
    p = resolve_problem("yukawa", {"A": 8, "L": 1, "nmax": 41, "dprec": 60})
    assert p.parameters["A"] == 8 and p.parameters["L"] == 1
    assert p.defaults.nmax == 41 and p.defaults.dprec == 60
    assert p.label_for(0) == "E01"


def test_override_unknown_key():
    with pytest.raises(ProblemError) as info:
        resolve_problem("yukawa", {"gamma": 3})
    assert any("gamma" in e for e in info.value.errors)


def test_unknown_catalog_name():
    with pytest.raises(KeyError):
        resolve_problem("nonesuch")


def test_ecsc_constants_are_exact():
    p = resolve_problem("ecsc", {"delta": Fraction(1, 100)})
    assert p.x0 == 8
    assert p.parameters["delta"] == Fraction(1, 100)
    # A1 = 2m/hbar^2 A with A = m = hbar = 1
    s0 = p.s0
    assert "." not in str(s0)


def test_ecsc_label_uses_principal_number():
    p = resolve_problem("ecsc", {"L": 1})
    assert p.label_for(0) == "E21"
    assert p.label_for(1) == "E31"


def test_qnm_requires_transcribed_entries():
    with pytest.raises(ProblemError) as info:
        resolve_problem("qnm")
    joined = " ".join(info.value.errors)
    for name in ("p", "kappa1", "xi1"):
        assert name in joined


def test_qnm_accepts_supplied_entries():
    p = resolve_problem("qnm", {"p": "xi^2*(1 - xi)", "dp": "2*xi - 3*xi^2", "kappa1": "1/4", "xi1": "1/2", "x0": "1/3"})
    assert p.eigen == "w"
    assert p.defaults.filter == "-i"


def test_sextic_calibration_pinned():
    p = resolve_problem("sextic")
    assert p.parameters["beta1"] == 0 and p.parameters["beta2"] == 2
    assert p.x0 == Fraction(3, 2)


def test_bound_expression_matches_manual_binding():
    p = resolve_problem("harmonic", {"L": 2})
    manual = bind_parameters(parse_expression("2*r - 2*(L+1)/r"), {"L": 2}, free=("E", "r"))
    assert p.lambda0 == manual

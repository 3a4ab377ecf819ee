from fractions import Fraction

import pytest

from aimkit.expr import parse_expression
from aimkit.oracle import OracleError, numerov_oracle
from aimkit.problem import OracleSpec, resolve_problem

import runs
from reference_values import ECSC_TABLE, YUKAWA_TABLE


def spec(W, **kw):
    return OracleSpec(parse_expression(W), **kw)


def test_coulomb_ground_state():
    (e0,) = numerov_oracle(spec("-4/r", e_min=Fraction(-5)), 1)
    assert e0 == pytest.approx(-4.0, abs=1e-6)


def test_coulomb_p_state():
    # -A^2 / (4 (L+1)^2) with A = 4, L = 1
    (e0,) = numerov_oracle(spec("2/r^2 - 4/r", e_min=Fraction(-5)), 1)
    assert e0 == pytest.approx(-1.0, abs=1e-6)


def test_radial_oscillator():
    vals = numerov_oracle(spec("r^2", r_max=Fraction(20), e_min=Fraction(0), e_max=Fraction(12)), 2)
    assert vals == pytest.approx([3.0, 7.0], abs=1e-8)


def test_yukawa_ground_state():
    p = resolve_problem("yukawa")
    vals = numerov_oracle(p.oracle, 2)
    assert vals[0] == pytest.approx(-3.256464, abs=5e-7)
    assert vals[1] == pytest.approx(-0.399426, abs=5e-7)


def test_window_exhausted():
    with pytest.raises(OracleError, match="only 1 eigenvalue"):
        numerov_oracle(spec("-4/r", e_min=Fraction(-5), e_max=Fraction(-2)), 2)


def test_bad_specs():
    with pytest.raises(ValueError):
        spec("r", h=Fraction(0))
    with pytest.raises(ValueError):
        spec("r", r_min=Fraction(2), r_max=Fraction(1))
    with pytest.raises(ValueError):
        numerov_oracle(spec("r^2", r_max=Fraction(10), e_max=Fraction(10)), 0)


def test_complex_potential_rejected():
    with pytest.raises(OracleError):
        numerov_oracle(spec("I*r", r_max=Fraction(5), e_max=Fraction(1)), 1)


# -- AIM against the oracle for every tabulated state ------------------------------------


@pytest.mark.slow
@pytest.mark.parametrize("A, L", sorted(YUKAWA_TABLE))
def test_aim_matches_oracle_yukawa(A, L):
    aim = runs.converged_values(runs.yukawa(A, L))[0]
    (e,) = numerov_oracle(resolve_problem("yukawa", {"A": A, "L": L}).oracle, 1)
    assert abs(complex(aim).real - e) <= 1e-6 * max(1.0, abs(e))


@pytest.mark.slow
@pytest.mark.parametrize("key", sorted(ECSC_TABLE), ids=lambda k: f"delta={k[0]}-L={k[1]}")
def test_aim_matches_oracle_ecsc(key):
    delta, L = key
    count = len(ECSC_TABLE[key])
    aim = runs.converged_values(runs.ecsc(delta, L))
    ref = numerov_oracle(resolve_problem("ecsc", {"delta": delta, "L": L}).oracle, count)
    for k, e in enumerate(ref):
        assert abs(complex(aim[k]).real - e) <= 1e-6 * max(1.0, abs(e)), (k, complex(aim[k]).real, e)

import random
from fractions import Fraction
from types import SimpleNamespace

import pytest
import sympy as sp

from aimkit.aim import AimError, SolverParams, checkpoints, delta, iterate, iterate_deltas, run, seed
from aimkit.expr import parse_expression
from aimkit.numerics import EXACT, EPoly, PrecisionContext, format_fixed
from aimkit.problem import resolve_problem
from aimkit.series import expand_series


def exact_state(l0, s0, x0, order, eigen="E", var="x"):
    L = expand_series(parse_expression(l0), eigen, var, x0, order, EXACT)
    S = expand_series(parse_expression(s0), eigen, var, x0, order, EXACT)
    return seed(L, S)


def fr(polys):
    return [p.to_fractions() for p in polys]


def problem(l0, s0, eigen="E", var="x"):
    return SimpleNamespace(lambda0=parse_expression(l0), s0=parse_expression(s0), eigen=eigen, variable=var)


# -- seed -----------------------------------------------------------------------------


def test_seed_harmonic():
    st = exact_state("2*x", "1 - E", 0, 3)
    assert st.n == 0 and st.order == 3
    assert fr(st.c) == [[], [2], [], []]
    assert fr(st.d) == [[1, -1], [], [], []]


def test_seed_order_zero_cannot_iterate():
    st = exact_state("2*x", "1 - E", 0, 0)
    assert len(st.c) == 1 and len(st.d) == 1
    with pytest.raises(AimError, match="increase the nmax budget"):
        iterate(st)


def test_seed_mismatch():
    a = expand_series(parse_expression("x"), "E", "x", 0, 3, EXACT)
    b = expand_series(parse_expression("x"), "E", "x", 0, 4, EXACT)
    c = expand_series(parse_expression("x"), "E", "x", 1, 3, EXACT)
    with pytest.raises(AimError):
        seed(a, b)
    with pytest.raises(AimError):
        seed(a, c)


def test_seed_yukawa_d0():
    p = resolve_problem("yukawa")
    ctx = PrecisionContext(40, 10)
    st = seed(
        expand_series(p.lambda0, p.eigen, p.variable, Fraction(1, 3), 4, ctx),
        expand_series(p.s0, p.eigen, p.variable, Fraction(1, 3), 4, ctx),
    )
    d0 = st.d0()
    assert d0.degree == 1
    assert abs(complex(d0[1]) + 1) < 1e-40
    # 9 - 12 exp(-1/15) for the attractive potential
    assert abs(complex(d0[0]) - (9 - 12 * 0.9355069850316178)) < 1e-14


# -- iterate and delta ----------------------------------------------------------------


def test_iterate_harmonic_at_origin():
    st0 = exact_state("2*x", "1 - E", 0, 3)
    st1 = iterate(st0)
    assert st1.n == 1 and st1.order == 2
    assert st1.c0().to_fractions() == [3, -1]
    assert st1.d0().is_zero()


@pytest.mark.parametrize("x0", [Fraction(1, 2), Fraction(-3, 7), Fraction(5)])
def test_iterate_harmonic_general_point(x0):
    st0 = exact_state("2*x", "1 - E", x0, 3)
    st1 = iterate(st0)
    assert st1.c0().to_fractions() == [3 + 4 * x0**2, -1]
    assert st1.d0().to_fractions() == ([2 * x0, -2 * x0] if x0 else [])
    # the 4 x0^2 terms cancel in delta_1
    assert delta(st1, st0).poly.to_fractions() == [-3, 4, -1]


def test_delta_harmonic_roots():
    st0 = exact_state("2*x", "1 - E", 0, 3)
    st1 = iterate(st0)
    d = delta(st1, st0)
    assert d.n == 1
    assert d.poly == EPoly([1, -1], EXACT) * EPoly([-3, 1], EXACT)


def test_delta_requires_consecutive_states():
    st0 = exact_state("2*x", "1 - E", 0, 4)
    st2 = iterate(iterate(st0))
    with pytest.raises(AimError):
        delta(st2, st0)


def test_zero_problem_stays_zero():
    st = exact_state("0", "0", Fraction(1, 2), 6)
    for s, d in iterate_deltas(
        expand_series(parse_expression("0"), "E", "x", 0, 6, EXACT),
        expand_series(parse_expression("0"), "E", "x", 0, 6, EXACT),
    ):
        assert all(p.is_zero() for p in s.c + s.d)
        assert d.poly.is_zero()
    assert all(p.is_zero() for p in st.c + st.d)


def test_checkpoint_schedule():
    assert checkpoints(201, 10)[:3] == [1, 11, 21]
    assert checkpoints(201, 10)[-1] == 201
    assert checkpoints(5, 1) == [1, 2, 3, 4, 5]
    assert checkpoints(100, 20) == [1, 21, 41, 61, 81]


def test_run_harmonic_contains_low_levels():
    params = SolverParams(nmax=5, nstep=1, dprec=40, x0=Fraction(1, 2), filter="r", digits=10)
    res = run(problem("2*x", "1 - E"), params)
    assert [n for n, _ in res.trace.checkpoints] == [1, 2, 3, 4, 5]
    for n, rs in res.rootsets.items():
        vals = [complex(v) for v in rs.values()]
        for want in (1, 3):
            assert min(abs(v - want) for v in vals) < 1e-20, (n, vals)


def test_run_degenerate_lambda_is_not_an_error():
    params = SolverParams(nmax=5, nstep=1, dprec=30, x0=Fraction(1, 2), filter="r", digits=5)
    res = run(problem("0", "1 - E"), params)
    assert [n for n, _ in res.trace.checkpoints] == [1, 2, 3, 4, 5]


# -- oracle equivalence ---------------------------------------------------------------

x_sym, E_sym = sp.symbols("x E")


def _random_poly(rng):
    terms = []
    for _ in range(rng.randint(1, 4)):
        c = rng.randint(-3, 3)
        i, j = rng.randint(0, 3), rng.randint(0, 1)
        if c:
            terms.append(c * x_sym**i * E_sym**j)
    return sp.Add(*terms) if terms else sp.Integer(rng.randint(-2, 2))


def _symbolic_deltas(l0, s0, nmax, x0):
    """Direct iteration of lambda_k = lambda_{k-1}' + s_{k-1} + lambda_0 lambda_{k-1}, s_k = s_{k-1}' + s_0 lambda_{k-1}."""
    lam, s = [l0], [s0]
    for _ in range(nmax):
        lp, sp_ = lam[-1], s[-1]
        lam.append(sp.expand(sp.diff(lp, x_sym) + sp_ + l0 * lp))
        s.append(sp.expand(sp.diff(sp_, x_sym) + s0 * lp))
    out = []
    for n in range(1, nmax + 1):
        d = sp.expand((s[n] * lam[n - 1] - s[n - 1] * lam[n]).subs(x_sym, x0))
        poly = sp.Poly(d, E_sym)
        out.append([Fraction(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs())] if d != 0 else [])
    return out


def _trim_zeros(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


def test_oracle_equivalence_random_instances():
    rng = random.Random(20240611)
    for trial in range(100):
        l0, s0 = _random_poly(rng), _random_poly(rng)
        x0 = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        nmax = rng.randint(1, 4)
        want = _symbolic_deltas(l0, s0, nmax, sp.Rational(x0.numerator, x0.denominator))
        L = expand_series(parse_expression(str(l0).replace("**", "^")), "E", "x", x0, nmax + 1, EXACT)
        S = expand_series(parse_expression(str(s0).replace("**", "^")), "E", "x", x0, nmax + 1, EXACT)
        got = [_trim_zeros(d.poly.to_fractions()) for _, d in iterate_deltas(L, S)][:nmax]
        assert got == [_trim_zeros(w) for w in want], (trial, l0, s0, x0)


# -- structural properties ------------------------------------------------------------


@pytest.mark.parametrize("name", ["yukawa", "ecsc"])
def test_degree_growth_bound(name):
    p = resolve_problem(name)
    ctx = PrecisionContext(40, 10)
    order = 16
    L = expand_series(p.lambda0, p.eigen, p.variable, p.defaults.x0, order, ctx)
    S = expand_series(p.s0, p.eigen, p.variable, p.defaults.x0, order, ctx)
    for st, d in iterate_deltas(L, S):
        n = st.n
        assert all(c.degree is None or c.degree <= n for c in st.c)
        assert all(c.degree is None or c.degree <= n + 1 for c in st.d)
        assert d.poly.degree <= 2 * n + 1


def test_precision_robustness_yukawa():
    p = resolve_problem("yukawa")
    base = dict(nmax=61, nstep=10, tol=Fraction(1, 10**8), x0=Fraction(1, 3), filter="-r", digits=8)
    lo = run(p, SolverParams(dprec=80, **base)).trace.converged
    hi = run(p, SolverParams(dprec=160, **base)).trace.converged
    assert lo, "nothing converged"
    assert [c.index for c in lo] == [c.index for c in hi]
    for a, b in zip(lo, hi):
        assert format_fixed(a.value.real, 8) == format_fixed(b.value.real, 8)

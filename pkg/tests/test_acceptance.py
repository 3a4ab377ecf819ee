"""Acceptance criteria.

Each criterion records one ``PASS``/``FAIL`` line.  Under pytest the lines are
printed in the terminal summary; ``python tests/test_acceptance.py`` runs the
criteria directly and prints them as they finish.

Tolerances are the published ones and are never relaxed.  A criterion that
cannot be met fails and says why in its detail text.
"""

import contextlib
import io
import math
import random
import sys
import time
from fractions import Fraction
from pathlib import Path
from unittest import mock

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

import runs  # noqa: E402
import test_aim as _aim  # noqa: E402
import test_expr as _expr  # noqa: E402
import test_numerics as _num  # noqa: E402
import test_roots as _roots  # noqa: E402
from reference_values import ECSC_TABLE, SEXTIC_TABLE, YUKAWA_LISTING, YUKAWA_TABLE  # noqa: E402

from aimkit import cli  # noqa: E402
from aimkit.numerics import format_fixed  # noqa: E402
from aimkit.oracle import numerov_oracle  # noqa: E402
from aimkit.problem import resolve_problem  # noqa: E402
from aimkit.report import run_catalog  # noqa: E402
from aimkit.roots import RootFilter, filter_roots  # noqa: E402

LINES = []
_HEADLINE = {}

HEADLINE_ARGS = ["run", "yukawa", "--set", "A=4", "--set", "L=0", "--nmax", "201", "--nstep", "10", "--dprec", "500", "--digits", "20"]


def record(name, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    LINES.append(line)
    print(line, flush=True)
    return ok


def fixed(x, digits):
    return format_fixed(x, digits)


# -- helpers ----------------------------------------------------------------------------


def headline():
    """Run the headline command once through the CLI, keeping the report."""
    if not _HEADLINE:
        captured = {}
        real_solve = cli.solve

        def spy(*a, **kw):
            captured["report"] = real_solve(*a, **kw)
            return captured["report"]

        out = io.StringIO()
        t0 = time.perf_counter()
        with mock.patch.object(cli, "solve", spy), contextlib.redirect_stdout(out):
            code = cli.main(HEADLINE_ARGS)
        _HEADLINE.update(code=code, wall=time.perf_counter() - t0, text=out.getvalue(), report=captured.get("report"))
    return _HEADLINE


def _table_rows(text):
    rows = {}
    for line in text.splitlines():
        parts = line.split()
        if parts and len(parts[0]) == 3 and parts[0].isdigit():
            rows[int(parts[0])] = parts[1:]
    return rows


# -- criteria ---------------------------------------------------------------------------


def check_headline():
    h = headline()
    rows = _table_rows(h["text"])
    bad_rows = [n for n, want in YUKAWA_LISTING.items() if rows.get(n) != want]
    footer = h["text"]
    e00 = "E00 = -3.25646424490722525404" in footer
    e10 = "E10 = -0.39942617065535111388" in footer
    ok = h["code"] == 0 and e00 and e10 and not bad_rows and h["wall"] <= 120
    detail = (
        f"E00 {'ok' if e00 else 'MISMATCH'}, E10 {'ok' if e10 else 'MISMATCH'}, "
        f"listing rows {len(YUKAWA_LISTING) - len(bad_rows)}/{len(YUKAWA_LISTING)} identical, "
        f"exit {h['code']}, wall {h['wall']:.1f} s (limit 120 s)"
    )
    return record("Yukawa headline (20 digits, <= 120 s)", ok, detail)


def check_table2():
    misses = []
    for (A, L), want in YUKAWA_TABLE.items():
        vals = runs.converged_values(runs.yukawa(A, L))
        got = fixed(vals[0].real, 6) if 0 in vals else "not converged"
        if got != fixed(Fraction(want), 6):
            misses.append(f"A={A} L={L}: {got} vs {want}")
    return record("Yukawa Table 2 (8 rows, 6 digits)", not misses, "; ".join(misses) or "8/8 rows match")


def check_ecsc():
    total, misses = 0, []
    for (delta, L), wants in ECSC_TABLE.items():
        rep = runs.ecsc(delta, L)
        vals = runs.converged_values(rep)
        for k, want in enumerate(wants):
            total += 1
            got = fixed(vals[k].real, 8) if k in vals else "not converged"
            if got != want:
                misses.append(f"delta={delta} {rep.label(k)}: {got} vs {want}")
    p = rep.params
    detail = f"{total - len(misses)}/{total} match at dprec {p.dprec}, nmax {p.nmax}"
    if misses:
        detail += "; mismatches: " + "; ".join(misses)
    return record("ECSC Table 3 (29 values, 8 digits)", not misses, detail)


def _sig14_ok(value, want: str) -> bool:
    ref = Fraction(want)
    e = math.floor(math.log10(abs(float(ref))))
    return abs(Fraction(fixed(value, 30)) - ref) <= Fraction(1, 2) * Fraction(10) ** (e - 13)


def check_sextic():
    misses, n = [], 0
    for J, wants in SEXTIC_TABLE.items():
        vals = runs.converged_values(runs.sextic(J))
        for k, want in enumerate(wants):
            n += 1
            if k not in vals or not _sig14_ok(vals[k].real, want):
                got = fixed(vals[k].real, 16) if k in vals else "not converged"
                misses.append(f"J={J} k={k}: {got} vs {want}")
    return record("Sextic Table 4 (16 values, 14 significant digits)", not misses, "; ".join(misses) or f"{n}/{n} match")


def check_qnm():
    rng = random.Random(5)
    worst_refl, worst_res, runs_done = 0.0, 0.0, 0
    for _ in range(4):
        a, b = Fraction(rng.randint(1, 9), 4), Fraction(rng.randint(-9, 9), 7)
        p = f"xi^2*({a} - xi) + {b}*xi^3"
        dp = f"2*xi*({a} - xi) - xi^2 + 3*{b}*xi^2"
        rep = run_catalog("qnm", {"p": p, "dp": dp, "kappa1": Fraction(rng.randint(1, 5), 8), "xi1": Fraction(rng.randint(5, 9), 10), "x0": Fraction(1, 3), "nmax": 21, "nstep": 10, "dprec": 60, "filter": "c"})
        for rs in rep.result.rootsets.values():
            vals = [complex(z) for z in rs.values()]
            for v in vals:
                worst_refl = max(worst_refl, min(abs(w + v.conjugate()) for w in vals) / max(1.0, abs(v)))
            worst_res = max(worst_res, max(float(r.residual) for r in rs.roots))
            runs_done += 1
        lower = filter_roots(rep.result.rootsets[21], RootFilter("-i", ctx=rep.params.context))
        assert all(complex(z).imag < 0 for z in lower)
    bound = 10.0 ** (-(60 // 2) + 20)
    ok = worst_refl < 1e-20 and worst_res <= bound
    detail = (
        "Table 5 waived (p, kappa1, xi1 not transcribed); replacement on QNM-form class: "
        f"reflection w -> -conj(w) closed to {worst_refl:.1e}, max residual {worst_res:.1e} <= {bound:.0e} over {runs_done} polynomials"
    )
    return record("QNM Table 5 (contingent)", ok, detail)


def check_analytic():
    bad = []
    rep = run_catalog("yukawa", {"alpha": 0, "A": 4, "L": 0, "nmax": 61, "nstep": 10, "dprec": 100})
    vals = runs.converged_values(rep)
    coulomb = abs(complex(vals[0]) + 4) if 0 in vals else math.inf
    if not coulomb <= 1e-15:
        bad.append(f"Coulomb E00 error {coulomb:.1e}")
    worst = 0.0
    for L in range(3):
        vals = runs.converged_values(run_catalog("harmonic", {"L": L, "nmax": 31}))
        for n in range(4):
            err = abs(complex(vals[n]) - (4 * n + 2 * L + 3)) if n in vals else math.inf
            worst = max(worst, err)
            if not err <= 1e-15:
                bad.append(f"oscillator n={n} L={L} error {err:.1e}")
    detail = "; ".join(bad) or f"Coulomb -4 within {coulomb:.1e}; oscillator 4n+2L+3 (n<=3, L<=2) within {worst:.1e}"
    return record("Analytic limits (1e-15)", not bad, detail)


def check_oracle_equivalence():
    try:
        _aim.test_oracle_equivalence_random_instances()
    except AssertionError as exc:
        return record("Oracle equivalence (100 exact instances, n <= 4)", False, str(exc).splitlines()[0])
    return record("Oracle equivalence (100 exact instances, n <= 4)", True, "recursion deltas equal symbolic deltas exactly")


def check_numerov():
    worst, bad = 0.0, []
    h = headline()["report"]
    cases = [("yukawa A=4 L=0", resolve_problem("yukawa"), runs.converged_values(h).get(0))]
    for delta in sorted({d for d, _ in ECSC_TABLE}):
        cases.append((f"ecsc delta={delta} 1s", resolve_problem("ecsc", {"delta": delta}), runs.converged_values(runs.ecsc(delta, 0)).get(0)))
    for name, prob, value in cases:
        (e,) = numerov_oracle(prob.oracle, 1)
        rel = abs(complex(value).real - e) / max(1.0, abs(e)) if value is not None else math.inf
        worst = max(worst, rel)
        if not rel <= 1e-6:
            bad.append(f"{name}: rel {rel:.1e}")
    return record("Numerov cross-check (ground states, 1e-6 relative)", not bad, "; ".join(bad) or f"{len(cases)} ground states, worst relative difference {worst:.1e}")


def check_x0_robustness():
    e13 = runs.converged_values(headline()["report"]).get(0)
    rep = run_catalog("yukawa", {"x0": Fraction(3, 10), "nmax": 201, "nstep": 50, "dprec": 500})
    e310 = runs.converged_values(rep).get(0)
    if e13 is None or e310 is None:
        return record("x0 robustness (1/3 vs 3/10, >= 15 digits)", False, "E00 did not converge")
    diff = abs(complex(e13) - complex(e310))
    rel = float(abs(e13 - e310).mid() / abs(e13).mid())
    return record("x0 robustness (1/3 vs 3/10, >= 15 digits)", rel < 1e-15, f"E00 relative difference {rel:.1e} (abs {diff:.1e})")


PROPERTY_TESTS = [
    ("series convolution", _expr.test_series_product_is_convolution),
    ("root residual bound", _roots.test_residual_bound_and_count),
    ("conjugate symmetry", _roots.test_conjugate_symmetry),
    ("degree bound (yukawa)", lambda: _aim.test_degree_growth_bound("yukawa")),
    ("degree bound (ecsc)", lambda: _aim.test_degree_growth_bound("ecsc")),
    ("precision doubling (polynomials)", _num.test_precision_doubling_keeps_leading_digits),
    ("precision doubling (eigenvalues)", _aim.test_precision_robustness_yukawa),
]


def check_properties():
    failed = []
    for name, fn in PROPERTY_TESTS:
        try:
            fn()
        except AssertionError as exc:
            failed.append(f"{name}: {str(exc).splitlines()[0] if str(exc) else 'assertion failed'}")
    names = ", ".join(n for n, _ in PROPERTY_TESTS)
    return record("Property suites", not failed, "; ".join(failed) or f"hold: {names}; x0 robustness reported separately")


CRITERIA = [
    check_headline,
    check_table2,
    check_ecsc,
    check_sextic,
    check_qnm,
    check_analytic,
    check_oracle_equivalence,
    check_numerov,
    check_x0_robustness,
    check_properties,
]


@pytest.mark.slow
@pytest.mark.parametrize("criterion", CRITERIA, ids=[c.__name__[6:] for c in CRITERIA])
def test_criterion(criterion):
    assert criterion(), LINES[-1]


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    print(f"\n{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)

"""Yukawa bound states step by step.

Expands lambda_0 and s_0 about x0, iterates the coefficient recursions, and
watches the lowest roots of delta_n(E) settle.  The last part compares the
converged levels with the Numerov shooting oracle.

    python demos/yukawa_walkthrough.py
"""

from aimkit import PrecisionContext, RootFilter, expand_series, filter_roots, find_roots, iterate_deltas, numerov_oracle, resolve_problem
from aimkit.numerics import format_fixed

spec = resolve_problem("yukawa", {"A": 8, "L": 1})
print("lambda0 =", spec.lambda0)
print("s0      =", spec.s0)
print("x0      =", spec.x0)

ctx = PrecisionContext(dprec=120)
nmax = 61
l0 = expand_series(spec.lambda0, spec.eigen, spec.variable, spec.x0, nmax + 1, ctx)
s0 = expand_series(spec.s0, spec.eigen, spec.variable, spec.x0, nmax + 1, ctx)
keep = RootFilter("-r", ctx=ctx)

print("\n   n  deg  lowest negative roots of delta_n")
for state, delta in iterate_deltas(l0, s0, levels=range(1, nmax + 1, 10)):
    if delta is None:
        continue
    found = filter_roots(find_roots(delta.poly.monic(), ctx), keep)
    shown = "  ".join(format_fixed(z.real, 12) for z in found[:3])
    print(f" {delta.n:3d}  {delta.poly.degree:3d}  {shown}")
    if state.n >= nmax:
        break

print("\nNumerov oracle (double precision):")
for k, e in enumerate(numerov_oracle(spec.oracle, 2)):
    print(f"  {spec.label_for(k)}  {e:.10f}")

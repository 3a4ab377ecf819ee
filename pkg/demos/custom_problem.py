"""Solve a problem that is not in the catalog.

``cornell.aim`` next to this script defines the Coulomb plus linear
potential.  The same file works from the shell::

    aimkit run demos/cornell.aim --set L=1
    aimkit oracle demos/cornell.aim --count 3
"""

from pathlib import Path

from aimkit import load_problem, numerov_oracle, render, solve

here = Path(__file__).resolve().parent

for L in (0, 1):
    problem = load_problem(here / "cornell.aim", {"L": L})
    report = solve(problem)
    print(render(report))
    print("oracle:", "  ".join(f"{e:.10f}" for e in numerov_oracle(problem.oracle, 3)))
    print()

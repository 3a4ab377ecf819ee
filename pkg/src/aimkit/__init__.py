"""aimkit: eigenvalues of y'' = lambda0(x) y' + s0(x) y by the improved
asymptotic iteration method, in arbitrary precision.

Typical use::

    from aimkit import run_catalog, render
    report = run_catalog("yukawa", {"A": 8, "L": 1, "nmax": 101})
    print(render(report))
"""

__version__ = "0.1.0"

from .aim import AimError, AimState, QuantizationDelta, SolverParams, checkpoints, delta, iterate, iterate_deltas, run, seed
from .expr import bind_parameters, parse_expression
from .numerics import EPoly, PrecisionContext
from .oracle import numerov_oracle
from .problem import OracleSpec, ProblemError, ProblemSpec, load_problem, resolve_problem
from .report import Report, render, run_catalog, solve
from .roots import ConvergenceTrace, RootFilter, RootSet, filter_roots, find_roots, track
from .series import XSeries, expand_series

__all__ = [
    "AimError",
    "AimState",
    "ConvergenceTrace",
    "EPoly",
    "OracleSpec",
    "PrecisionContext",
    "ProblemError",
    "ProblemSpec",
    "QuantizationDelta",
    "Report",
    "RootFilter",
    "RootSet",
    "SolverParams",
    "XSeries",
    "bind_parameters",
    "checkpoints",
    "delta",
    "expand_series",
    "filter_roots",
    "find_roots",
    "iterate",
    "iterate_deltas",
    "load_problem",
    "numerov_oracle",
    "parse_expression",
    "render",
    "resolve_problem",
    "run",
    "run_catalog",
    "seed",
    "solve",
    "track",
]

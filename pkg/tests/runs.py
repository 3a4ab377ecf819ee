"""Catalog runs shared by several test modules (cached per session)."""

from functools import lru_cache

from aimkit.report import run_catalog

# Settings for the 6-digit table rows.  The catalog tol of 1e-20 belongs to the
# 20-digit headline run; at nmax 101 the A = 24 ground state moves by ~4e-15.
TABLE2 = {"nmax": 101, "nstep": 20, "dprec": 200, "tol": "10^(-12)"}


@lru_cache(maxsize=None)
def yukawa(A, L, **extra):
    return run_catalog("yukawa", {"A": A, "L": L, **TABLE2, **extra})


@lru_cache(maxsize=None)
def ecsc(delta, L):
    return run_catalog("ecsc", {"delta": delta, "L": L})


@lru_cache(maxsize=None)
def sextic(J):
    return run_catalog("sextic", {"J": J})


def converged_values(report) -> dict:
    """index -> acb value of every converged eigenvalue."""
    return {c.index: c.value for c in report.converged}

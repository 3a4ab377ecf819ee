"""Independent double-precision eigenvalues by Numerov shooting.

Used only as a cross-check of the AIM results.  The radial equation
``u'' = (W(r) - eps) u`` is integrated outward from ``u(r_min) = 0`` on a
uniform grid with the Numerov scheme.  By Sturm oscillation the number of
sign changes of ``u`` on ``(r_min, r_max]`` counts the Dirichlet eigenvalues
below ``eps``, so each eigenvalue is located by bisection on that count.

Two refinements keep the double-precision result at the 1e-8 level for
Coulomb-like potentials.  The integration starts from the regular local
solution ``r^s (1 + k r)`` fitted to ``W ~ a/r^2 + b/r`` near ``r_min``
(a plain Dirichlet wall at ``r_min`` shifts s-states by ``|u'(0)|^2 r_min``),
and the O(h^2) error that the 1/r singularity leaves in the Numerov scheme
is removed by Richardson extrapolation over the steps h and h/2.

The Numerov recurrence is a lower-triangular banded system; it is solved in
chunks with :func:`scipy.linalg.solve_banded` and renormalized between chunks
so that growth in classically forbidden regions never overflows.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import solve_banded

from .expr import lambdify

__all__ = ["OracleError", "numerov_oracle", "NumerovGrid"]

_CHUNK = 4096


class OracleError(RuntimeError):
    pass


class NumerovGrid:
    """Grid, potential samples and the shooting kernel for one OracleSpec."""

    def __init__(self, spec, refine: int = 1):
        self.spec = spec
        r0, r1, h = float(spec.r_min), float(spec.r_max), float(spec.h) / refine
        n = int(math.floor((r1 - r0) / h + 1e-9))
        self.r = r0 + h * np.arange(n + 1)
        self.h = h
        f = lambdify(spec.W, spec.variable)
        W = _real(f(self.r))
        self._start = _regular_start(f, r0, self.r[1])
        if not np.all(np.isfinite(W)):
            raise OracleError("W(r) is not finite on the grid")
        self.W = W
        self.scale = float(spec.scale)

    def shoot(self, E: float):
        """Node count and normalized end value of u for energy ``E``."""
        t = (self.h * self.h / 12.0) * (self.W - self.scale * E)
        A = 2.0 * (1.0 + 5.0 * t)
        B = 1.0 - t
        n = len(self.r) - 1
        um, u = self._start
        nodes = 0
        last = 1.0
        j = 1
        while j < n:
            m = min(_CHUNK, n - j)
            ab = np.zeros((3, m))
            ab[0] = B[j + 1 : j + 1 + m]
            ab[1, : m - 1] = -A[j + 1 : j + m]
            ab[2, : m - 2] = B[j + 1 : j + m - 1]
            rhs = np.zeros(m)
            rhs[0] = A[j] * u - B[j - 1] * um
            if m > 1:
                rhs[1] = -B[j] * u
            x = solve_banded((2, 0), ab, rhs, check_finite=False)
            s = np.sign(x)
            s = s[s != 0]
            if s.size:
                nodes += int(s[0] != last) + int(np.count_nonzero(s[1:] != s[:-1]))
                last = s[-1]
            um, u = (x[-2] if m > 1 else u), x[-1]
            big = max(abs(um), abs(u))
            if big > 0:
                um, u = um / big, u / big
            j += m
        return nodes, u


def _real(W):
    W = np.asarray(W)
    if np.iscomplexobj(W):
        if np.abs(W.imag).max() > 0:
            raise OracleError("W(r) must be real on the grid")
        W = W.real
    return W.astype(float)


def _regular_start(f, r0: float, r1: float):
    """u(r0), u(r1) of the solution regular at the origin.

    Fits ``W ~ a/r^2 + b/r`` from samples at r0 and 2*r0, then uses the
    Frobenius solution ``r^s (1 + k r)`` with ``s(s-1) = a`` and ``k = b/(2s)``.
    """
    w1, w2 = _real(f(np.array([r0, 2 * r0])))
    b = (4 * w2 - w1) * r0 / 2.0
    a = max(w1 * r0 * r0 - b * r0, 0.0)
    if not (math.isfinite(a) and math.isfinite(b)):
        return 0.0, 1e-12
    s = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * a))
    k = b / (2.0 * s)
    u0, u1 = r0**s * (1 + k * r0), r1**s * (1 + k * r1)
    return u0 / u1, 1.0


def _eigenvalues(grid, lo, hi, count, rtol):
    n_lo, _ = grid.shoot(lo)
    n_hi, _ = grid.shoot(hi)
    if n_hi - n_lo < count:
        raise OracleError(f"only {n_hi - n_lo} eigenvalue(s) in the window [{lo}, {hi}], {count} requested")
    out = []
    for k in range(n_lo, n_lo + count):
        a, b = lo, hi
        for _ in range(200):
            mid = 0.5 * (a + b)
            if grid.shoot(mid)[0] > k:
                b = mid
            else:
                a = mid
            if b - a <= rtol * max(1.0, abs(mid)):
                break
        out.append(0.5 * (a + b))
        lo = a
    return out


def numerov_oracle(spec, count: int, rtol: float = 1e-13, extrapolate: bool = True) -> list:
    """Lowest ``count`` Dirichlet eigenvalues of ``u'' = (W - scale*E) u``.

    Parameters
    ----------
    spec : OracleSpec
    count : int
        Number of eigenvalues wanted (>= 1).
    rtol : float
        Bisection stops when the bracket is below ``rtol * max(1, |E|)``.
    extrapolate : bool
        Combine the runs at h and h/2 as ``(4 E(h/2) - E(h)) / 3``.

    Returns
    -------
    list of float, ascending.

    Raises
    ------
    OracleError
        if the search window holds fewer than ``count`` eigenvalues.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    grid = NumerovGrid(spec)
    hi = float(spec.e_max)
    lo = float(spec.e_min) if spec.e_min is not None else float(grid.W[1:].min()) / grid.scale
    coarse = _eigenvalues(grid, lo, hi, count, rtol)
    if not extrapolate:
        return coarse
    fine = _eigenvalues(NumerovGrid(spec, refine=2), lo, hi, count, rtol)
    return [(4.0 * f - c) / 3.0 for c, f in zip(coarse, fine)]

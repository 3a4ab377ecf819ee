"""The improved asymptotic iteration kernel.

Given Taylor data of lambda_0 and s_0 about x0, the coefficients of
lambda_n and s_n obey::

    c_n^i = (i+1) c_{n-1}^{i+1} + d_{n-1}^i + sum_{j<=i} c_0^j c_{n-1}^{i-j}
    d_n^i = (i+1) d_{n-1}^{i+1} +             sum_{j<=i} d_0^j c_{n-1}^{i-j}

and the quantization polynomial at level n is
``delta_n(E) = d_n^0 c_{n-1}^0 - d_{n-1}^0 c_n^0``.

Viewing the coefficient arrays as truncated polynomials in (x - x0) the two
recursions read ``c_n = c_{n-1}' + d_{n-1} + c_0 c_{n-1}`` and
``d_n = d_{n-1}' + d_0 c_{n-1}``, which is how they are evaluated here: one
derivative and one truncated product per power of E.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from . import _xpoly
from .numerics import EPoly, PrecisionContext, to_fraction
from .roots import (
    ConvergenceTrace,
    RootFilter,
    RootFindingError,
    RootSet,
    filter_roots,
    find_roots,
    track,
)
from .series import XSeries, expand_series

__all__ = [
    "AimError",
    "AimState",
    "SolverParams",
    "QuantizationDelta",
    "seed",
    "iterate",
    "delta",
    "iterate_deltas",
    "checkpoints",
    "run",
]

log = logging.getLogger(__name__)


class AimError(ValueError):
    pass


@dataclass(frozen=True)
class SolverParams:
    """Iteration and reporting settings.

    Attributes
    ----------
    nmax : int
        Last iteration level.
    nstep : int
        Checkpoint stride; checkpoints are 1, 1+nstep, 1+2*nstep, ...
    dprec : int
        Working precision in decimal digits.
    tol : Fraction
        Convergence tolerance between successive checkpoints.
    x0 : Fraction
        Expansion point.
    filter : str
        Root filter code (``-r``, ``+r``, ``r``, ``+i``, ``-i``, ``c``).
    digits : int
        Fraction digits printed by the table renderer.
    print_every : int
        Table shows every k-th checkpoint (the last one is always shown).
    strict : bool
        Use the residual-derived root radius instead of checkpoint distance.
    guard : int
        Guard digits of the precision context.
    """

    nmax: int = 51
    nstep: int = 10
    dprec: int = 50
    tol: Fraction = Fraction(1, 10**10)
    x0: Fraction = Fraction(1)
    filter: str = "-r"
    digits: int = 15
    print_every: int = 1
    strict: bool = False
    guard: int = 20

    def __post_init__(self):
        errs = []
        if int(self.nmax) != self.nmax or self.nmax < 1:
            errs.append(f"nmax must be a positive integer (got {self.nmax})")
        if int(self.nstep) != self.nstep or not 1 <= self.nstep <= max(self.nmax, 1):
            errs.append(f"nstep must satisfy 1 <= nstep <= nmax (got {self.nstep})")
        try:
            tol = to_fraction(self.tol)
            object.__setattr__(self, "tol", tol)
            if tol <= 0:
                errs.append("tol must be positive")
        except (TypeError, ValueError):
            errs.append(f"tol must be an exact rational (got {self.tol!r})")
        if int(self.digits) != self.digits or self.digits < 1:
            errs.append(f"digits must be >= 1 (got {self.digits})")
        if int(self.print_every) != self.print_every or self.print_every < 1:
            errs.append(f"print_every must be >= 1 (got {self.print_every})")
        if self.dprec < 15:
            errs.append(f"dprec must be >= 15 (got {self.dprec})")
        if self.digits > self.dprec - self.guard and self.dprec > self.guard:
            errs.append(f"digits ({self.digits}) may not exceed dprec - guard ({self.dprec - self.guard})")
        try:
            RootFilter(self.filter)
        except ValueError as exc:
            errs.append(str(exc))
        object.__setattr__(self, "x0", to_fraction(self.x0))
        if errs:
            raise ValueError("; ".join(errs))

    @property
    def context(self) -> PrecisionContext:
        return PrecisionContext(self.dprec, self.guard)

    def replace(self, **kw) -> "SolverParams":
        from dataclasses import replace

        return replace(self, **kw)


@dataclass(frozen=True)
class QuantizationDelta:
    """delta_n(E) at iteration level n."""

    n: int
    poly: EPoly


class AimState:
    """Coefficient arrays c_n^i, d_n^i at one iteration level.

    ``c`` and ``d`` are lists of :class:`EPoly` indexed by i (the power of
    (x - x0)), ``order`` is the highest retained i.  The seed arrays of
    level 0 travel with every state because the recursions read them.
    """

    __slots__ = ("n", "order", "ctx", "ring", "_c", "_d", "_seed")

    def __init__(self, n, order, ctx, ring, c_terms, d_terms, seed_terms):
        self.n = n
        self.order = order
        self.ctx = ctx
        self.ring = ring
        self._c = _trim(c_terms)
        self._d = _trim(d_terms)
        self._seed = seed_terms

    def _epolys(self, terms):
        m = self.order + 1
        cols = [self.ring.coeff_list(p, m) for p in terms]
        return [EPoly([col[i] for col in cols], self.ctx) for i in range(m)]

    @property
    def c(self) -> list:
        return self._epolys(self._c)

    @property
    def d(self) -> list:
        return self._epolys(self._d)

    def c0(self) -> EPoly:
        """c_n^0 as a polynomial in E."""
        return EPoly([self.ring.coeff(p, 0) for p in self._c], self.ctx)

    def d0(self) -> EPoly:
        return EPoly([self.ring.coeff(p, 0) for p in self._d], self.ctx)

    def __repr__(self):
        return f"AimState(n={self.n}, order={self.order})"


def _trim(terms):
    terms = list(terms)
    while terms and terms[-1].length() == 0:
        terms.pop()
    return terms


def seed(l0: XSeries, s0: XSeries) -> AimState:
    """Level-0 state from the expansions of lambda_0 and s_0."""
    if l0.order != s0.order:
        raise AimError(f"order mismatch: lambda_0 has {l0.order}, s_0 has {s0.order}")
    if l0.x0 != s0.x0 or l0.variable != s0.variable:
        raise AimError("lambda_0 and s_0 are expanded about different points")
    if l0.ctx != s0.ctx:
        raise AimError("lambda_0 and s_0 use different precision contexts")
    ring = l0.ring
    c, d = list(l0.terms), list(s0.terms)
    if l0.ring is not s0.ring:
        ring = _xpoly.COMPLEX
        with l0.ctx.active():
            c = [_xpoly.promote(l0.ring, p) for p in c]
            d = [_xpoly.promote(s0.ring, p) for p in d]
    return AimState(0, l0.order, l0.ctx, ring, c, d, (tuple(c), tuple(d)))


def iterate(prev: AimState) -> AimState:
    """Apply the coefficient recursions once."""
    if prev.order < 1:
        raise AimError(
            f"truncation order exhausted at level {prev.n}; increase the nmax budget / initial order"
        )
    ring = prev.ring
    L = prev.order  # new length = new order + 1 = prev.order
    c0s, d0s = prev._seed
    c, d = prev._c, prev._d
    mul = ring.mul_trunc
    with prev.ctx.active():
        nc = [p.derivative().truncate(L) for p in c]
        for k, p in enumerate(d):
            q = p.truncate(L)
            if k < len(nc):
                nc[k] = nc[k] + q
            else:
                nc.append(q)
        nd = [p.derivative().truncate(L) for p in d]
        for b, p in enumerate(c):
            if p.length() == 0:
                continue
            for a, s in enumerate(c0s):
                if s.length():
                    _acc(nc, a + b, mul(s, p, L), ring)
            for a, s in enumerate(d0s):
                if s.length():
                    _acc(nd, a + b, mul(s, p, L), ring)
    return AimState(prev.n + 1, prev.order - 1, prev.ctx, ring, nc, nd, prev._seed)


def _acc(terms, k, p, ring):
    while len(terms) <= k:
        terms.append(ring.zero())
    terms[k] = terms[k] + p


def delta(curr: AimState, prev: AimState) -> QuantizationDelta:
    """delta_n = d_n^0 c_{n-1}^0 - d_{n-1}^0 c_n^0 (normalized)."""
    if curr.n != prev.n + 1:
        raise AimError(f"delta needs consecutive states, got levels {prev.n} and {curr.n}")
    poly = curr.d0() * prev.c0() - prev.d0() * curr.c0()
    return QuantizationDelta(curr.n, poly)


def iterate_deltas(l0: XSeries, s0: XSeries, levels=None):
    """Yield ``(state, QuantizationDelta)`` for n = 1 .. l0.order.

    If ``levels`` is given, deltas are only formed at those n (others yield
    ``None`` in place of the delta).
    """
    prev = seed(l0, s0)
    want = None if levels is None else set(levels)
    while prev.order >= 1:
        curr = iterate(prev)
        dl = delta(curr, prev) if want is None or curr.n in want else None
        yield curr, dl
        prev = curr


def checkpoints(nmax: int, nstep: int) -> list:
    """Levels 1, 1+nstep, 1+2*nstep, ... not exceeding nmax."""
    return list(range(1, nmax + 1, nstep))


@dataclass
class RunResult:
    """Everything a solve produced, before rendering."""

    trace: ConvergenceTrace
    rootsets: dict = field(default_factory=dict)
    wall_time_s: float = 0.0
    iteration_time_s: float = 0.0
    root_time_s: float = 0.0


def run(problem, params: SolverParams, progress: Optional[Callable] = None) -> RunResult:
    """Solve ``problem`` with ``params``.

    ``problem`` provides ``lambda0`` and ``s0`` (bound expressions),
    ``eigen`` and ``variable`` (symbol names).  The series are expanded to
    order nmax + 1, the kernel is iterated to nmax and every checkpoint's
    delta_n is handed to the root finder.
    """
    ctx = params.context
    flt = RootFilter(params.filter, ctx=ctx)
    t0 = time.perf_counter()
    order = params.nmax + 1
    l0 = expand_series(problem.lambda0, problem.eigen, problem.variable, params.x0, order, ctx)
    s0 = expand_series(problem.s0, problem.eigen, problem.variable, params.x0, order, ctx)
    wanted = checkpoints(params.nmax, params.nstep)
    last = wanted[-1]
    points, rootsets = [], {}
    t_roots = 0.0
    for state, dl in iterate_deltas(l0, s0, wanted):
        if dl is not None:
            t1 = time.perf_counter()
            rs = _roots_of(dl, ctx)
            t_roots += time.perf_counter() - t1
            rootsets[dl.n] = rs
            points.append((dl.n, filter_roots(rs, flt), rs))
            if progress is not None:
                progress(dl.n, rs)
            log.debug("checkpoint %d: degree %s, %d roots kept", dl.n, rs.degree, len(points[-1][1]))
        if state.n >= last:
            break
    trace = track(points, params.tol, strict=params.strict)
    wall = time.perf_counter() - t0
    return RunResult(trace, rootsets, wall, wall - t_roots, t_roots)


def _roots_of(dl: QuantizationDelta, ctx) -> RootSet:
    p = dl.poly
    if p.is_zero() or p.degree == 0:
        return RootSet([], 0 if not p.is_zero() else None, ctx)
    try:
        return find_roots(p.monic(), ctx)
    except RootFindingError as exc:
        log.warning("checkpoint %d: %s", dl.n, exc)
        return exc.partial

"""Polynomial roots at working precision, root filters and convergence tracking.

Roots are found with the Aberth-Ehrlich simultaneous iteration in two phases.

1. Extended precision (numpy ``clongdouble``): the polynomial is rescaled by
   a power of two near its root radius and iterated from points on a circle
   until each estimate's residual reaches the rounding-noise level of that
   format.  This does the bulk of the work cheaply.
2. Multiprecision (FLINT ``acb``): Newton corrections are evaluated with
   growing binary precision up to the context's working precision, until the
   relative update of every root drops below ``10**(-dprec/2)``.

The Ehrlich repulsion sum only perturbs the second-order part of the update
near convergence, so it is computed in ``clongdouble`` except for roots
whose nearest neighbour is too close for that format to separate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from flint import acb, acb_poly, arb, arb_poly

from .numerics import EPoly, PrecisionContext, bits_precision, to_real

__all__ = [
    "FILTERS",
    "RootFilter",
    "Root",
    "RootSet",
    "RootFindingError",
    "find_roots",
    "filter_roots",
    "ConvergedRoot",
    "ConvergenceTrace",
    "track",
]

FILTERS = ("-r", "+r", "r", "+i", "-i", "c")

_LD = np.longdouble
_CLD = np.clongdouble
_LD_EPS = float(np.finfo(_LD).eps)
MAX_SWEEPS = 1000
_LEVEL_SWEEPS = 60


class RootFindingError(ArithmeticError):
    """Iteration cap hit with residuals above the acceptance bound.

    ``partial`` holds the best estimates; a larger ``dprec`` usually helps.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class Root:
    """One root estimate.

    ``residual`` is the relative backward error ``|P(z)| / sum |a_i||z|^i``,
    ``radius`` the Newton inclusion radius ``deg * |P(z)/P'(z)|``.
    """

    value: acb
    residual: arb
    radius: arb

    @property
    def real(self) -> arb:
        return self.value.real

    @property
    def imag(self) -> arb:
        return self.value.imag


@dataclass
class RootSet:
    """All roots of one polynomial (with multiplicity)."""

    roots: list
    degree: Optional[int]
    ctx: Optional[PrecisionContext] = None
    sweeps: tuple = (0, 0)

    def values(self) -> list:
        return [r.value for r in self.roots]

    def __len__(self):
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)


class RootFilter:
    """Selection of roots by reality class and sign.

    Parameters
    ----------
    kind : str
        ``-r`` negative real, ``+r`` non-negative real, ``r`` real,
        ``+i`` upper half-plane, ``-i`` lower half-plane, ``c`` everything.
    real_eps : optional
        A root counts as real when ``|Im| <= real_eps``.  Defaults to
        ``10**(-dprec/4)`` of ``ctx``.
    """

    def __init__(self, kind: str, real_eps=None, ctx: PrecisionContext = None):
        if kind not in FILTERS:
            raise ValueError(f"unknown root filter {kind!r}; expected one of {', '.join(FILTERS)}")
        self.kind = kind
        if real_eps is None:
            dprec = ctx.dprec if ctx is not None else 50
            real_eps = Fraction(1, 10 ** (dprec // 4))
        if real_eps <= 0:
            raise ValueError("real_eps must be positive")
        self.real_eps = real_eps

    def classify(self, z: acb) -> str:
        """``-r``, ``+r``, ``+i`` or ``-i``."""
        im = z.imag.mid()
        eps = to_real(self.real_eps)
        if abs(im) <= eps:
            return "-r" if z.real.mid() < 0 else "+r"
        return "+i" if im > 0 else "-i"

    def accepts(self, z: acb) -> bool:
        if self.kind == "c":
            return True
        cls = self.classify(z)
        if self.kind == "r":
            return cls in ("-r", "+r")
        return cls == self.kind

    def __repr__(self):
        return f"RootFilter({self.kind!r})"


def _sort_key(z: acb):
    return (z.real.mid(), z.imag.mid())


class _Key:
    """Total order on acb midpoints by (re, im) without float conversion."""

    __slots__ = ("re", "im")

    def __init__(self, z):
        self.re, self.im = _sort_key(z)

    def __lt__(self, other):
        if self.re < other.re:
            return True
        if self.re > other.re:
            return False
        return bool(self.im < other.im)


def sort_roots(values: Sequence) -> list:
    return sorted(values, key=_Key)


def filter_roots(rs, f: RootFilter) -> list:
    """Roots accepted by ``f``, sorted by real part, then imaginary part."""
    vals = rs.values() if isinstance(rs, RootSet) else list(rs)
    with _ctx_of(rs):
        return sort_roots([z for z in vals if f.accepts(z)])


def _ctx_of(rs):
    ctx = rs.ctx if isinstance(rs, RootSet) and rs.ctx is not None else None
    if ctx is None:
        from contextlib import nullcontext

        return nullcontext()
    return ctx.active()


# -- conversions between arb and long double ------------------------------------------


def _arb_ld(x: arb):
    man, exp = x.mid().man_exp()
    man, exp = int(man), int(exp)
    if man == 0:
        return _LD(0)
    shift = max(man.bit_length() - 64, 0)
    return np.ldexp(_LD(man >> shift if man > 0 else -((-man) >> shift)), exp + shift)


def _acb_cld(z: acb):
    return _CLD(complex(0)) + _arb_ld(z.real) + 1j * _arb_ld(z.imag)


def _cld_acb(z) -> acb:
    return acb(_ld_arb(z.real), _ld_arb(z.imag))


def _ld_arb(x) -> arb:
    if x == 0 or not np.isfinite(x):
        return arb(0)
    m, e = np.frexp(x)
    mi = int(np.ldexp(m, 64))
    return arb(mi) * arb(2) ** (int(e) - 64)


def _log2abs(c: acb) -> float:
    a = abs(c).mid()
    if a.is_zero():
        return -math.inf
    if not a.is_finite():
        return math.inf
    man, exp = a.man_exp()
    return math.log2(int(man)) + int(exp)


def _cauchy_log2(logm: list) -> float:
    """log2 of the positive root of x^d = sum_{i<d} |a_i| x^i (monic input)."""
    d = len(logm) - 1
    a = np.array(logm[:-1], dtype=float)
    i = np.arange(d, dtype=float)
    finite = np.isfinite(a)
    a, i = a[finite], i[finite]
    if a.size == 0:
        return 0.0
    lo = float(np.min(a)) / d - 2 - math.log2(d) if a.size else -1.0
    hi = float(np.max(a)) + 2 + math.log2(d)
    lo = min(lo, -hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        t = a + mid * i
        m = t.max()
        s = m + math.log2(np.exp2(t - m).sum())
        if s >= d * mid:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-9:
            break
    return hi


# -- Aberth-Ehrlich -------------------------------------------------------------------


def _phase1(b: np.ndarray, z: np.ndarray, maxiter: int) -> int:
    """Long double sweeps on the scaled monic polynomial ``b`` (ascending)."""
    d = len(b) - 1
    ab = np.abs(b)
    active = np.ones(d, bool)
    sweeps = 0
    noise = 8 * d * _LD_EPS
    for sweeps in range(1, maxiter + 1):
        idx = np.flatnonzero(active)
        za = z[idx]
        pv = np.full(za.shape, b[-1], dtype=_CLD)
        dv = np.zeros_like(za)
        av = np.full(za.shape, ab[-1], dtype=_LD)
        az = np.abs(za)
        for c, ac in zip(b[-2::-1], ab[-2::-1]):
            dv = dv * za + pv
            pv = pv * za + c
            av = av * az + ac
        done = np.abs(pv) <= noise * av
        with np.errstate(divide="ignore", invalid="ignore"):
            diff = za[:, None] - z[None, :]
            diff[np.arange(idx.size), idx] = np.inf
            S = (1 / diff).sum(axis=1)
            N = pv / dv
            w = N / (1 - N * S)
        bad = ~np.isfinite(w)
        w[bad | done] = 0
        z[idx] = za - w
        active[idx[done]] = False
        if not active.any():
            break
    return sweeps


def _levels(bits: int) -> list:
    out = []
    b = 128
    while b < bits:
        out.append(b)
        b *= 2
    out.append(bits)
    return out


def _aberth(cs: list, ctx: PrecisionContext, maxiter: int):
    """Roots of the monic polynomial with acb coefficients ``cs`` (ascending)."""
    d = len(cs) - 1
    logm = [_log2abs(c) for c in cs]
    r2 = _cauchy_log2(logm)
    e2 = math.floor(r2)
    scale = arb(2) ** e2
    b = np.array([_acb_cld(cs[i] * scale ** (i - d)) for i in range(d + 1)], dtype=_CLD)
    R = _LD(2.0 ** (r2 - e2))
    k = np.arange(d)
    z = (R * np.exp(1j * (2 * np.pi * k / d + np.pi / (2 * d)))).astype(_CLD)
    s1 = _phase1(b, z, maxiter)
    zs = [_cld_acb(x) * scale for x in z]

    P = acb_poly(cs)
    dP = P.derivative()
    absP = arb_poly([abs(c).mid() for c in cs])
    final_thr = arb(10) ** (-(ctx.dprec // 2))
    conv = [False] * d
    sweeps = 0
    zl = np.array([_acb_cld(x) for x in zs], dtype=_CLD)
    for bits in _levels(ctx.bits):
        final = bits == ctx.bits
        thr = final_thr if final else arb(2) ** (-(bits * 2 // 3))
        noise = arb(8 * d) * arb(2) ** (-bits)
        done = list(conv)
        last = [math.inf] * d
        fails = [0] * d
        # lower levels only accelerate; leave stubborn roots to the next one
        budget = maxiter if final else sweeps + _LEVEL_SWEEPS
        with bits_precision(bits):
            while not all(done) and sweeps < min(budget, maxiter):
                sweeps += 1
                S, close = _ehrlich(zl, done)
                new = list(zs)
                for i in range(d):
                    if done[i]:
                        continue
                    zi = zs[i]
                    pz = P(zi)
                    N = pz / dP(zi)
                    Si = _exact_sum(zs, i) if close[i] else S[i]
                    w = N / (1 - N * Si)
                    if not w.is_finite():
                        w = N
                    if not w.is_finite():
                        fails[i] += 1
                        done[i] = fails[i] >= 3
                        continue
                    new[i] = (zi - w).mid()
                    zl[i] = _acb_cld(new[i])
                    rel = _log2abs(w) - max(0.0, _log2abs(zi))
                    if abs(w).mid() <= thr * max(arb(1), abs(zi).mid()):
                        done[i] = True
                    elif rel >= last[i] - 0.5:
                        # not contracting: either limited by rounding noise
                        # (stop) or still travelling towards its root
                        az = abs(zi).mid()
                        done[i] = bool(abs(pz).mid() <= noise * absP(az).mid())
                    last[i] = rel
                zs = new
        if final:
            conv = done
    return zs, (s1, sweeps), all(conv)


def _ehrlich(zl: np.ndarray, done: list):
    """Ehrlich sums sum_{j != i} 1/(z_i - z_j) for the unfinished roots."""
    idx = np.flatnonzero(~np.asarray(done, bool))
    S = [None] * len(zl)
    close = np.zeros(len(zl), bool)
    if idx.size == 0:
        return S, close
    with np.errstate(divide="ignore", invalid="ignore"):
        diff = zl[idx, None] - zl[None, :]
        diff[np.arange(idx.size), idx] = np.inf
        sums = (1 / diff).sum(axis=1)
        near = np.abs(diff).min(axis=1)
    scale = np.maximum(np.abs(zl[idx]), _LD(1e-300))
    close[idx] = ~(near > 1e-14 * scale) | ~np.isfinite(sums)
    for k, i in enumerate(idx):
        if not close[i]:
            S[i] = _cld_acb(sums[k])
    return S, close


def _exact_sum(zs: list, i: int) -> acb:
    zi = zs[i]
    s = acb(0)
    for j, zj in enumerate(zs):
        if j != i:
            dz = zi - zj
            if not dz.is_zero():
                s += 1 / dz
    return s


def find_roots(p: EPoly, ctx: PrecisionContext = None, maxiter: int = MAX_SWEEPS) -> RootSet:
    """All complex roots of ``p`` with multiplicity.

    Parameters
    ----------
    p : EPoly
        Numeric polynomial of degree >= 1.
    ctx : PrecisionContext, optional
        Defaults to ``p.ctx``.
    maxiter : int
        Cap on the number of sweeps of each phase.

    Returns
    -------
    RootSet

    Raises
    ------
    ValueError
        for the zero polynomial or a constant.
    RootFindingError
        if the cap is hit and some residual exceeds ``10**(-dprec/2 + guard)``.
    """
    ctx = ctx or p.ctx
    if ctx.exact:
        raise TypeError("find_roots needs a numeric precision context")
    if p.is_zero():
        raise ValueError("the zero polynomial has no finite root set")
    if p.degree == 0:
        raise ValueError("a nonzero constant has no roots")
    with ctx.active():
        cs = [acb(c) for c in p.coeffs]
        nzero = 0
        while cs[nzero].is_zero():
            nzero += 1
        cs = cs[nzero:]
        lead = cs[-1]
        cs = [(c / lead).mid() for c in cs]
        d = len(cs) - 1
        if d == 0:
            zs, sweeps, ok = [], (0, 0), True
        elif d == 1:
            zs, sweeps, ok = [-cs[0]], (0, 0), True
        else:
            zs, sweeps, ok = _aberth(cs, ctx, maxiter)
        P = acb_poly(cs)
        dP = P.derivative()
        absP = acb_poly([abs(c).mid() for c in cs])
        roots = [Root(acb(0), arb(0), arb(0)) for _ in range(nzero)]
        for z in zs:
            pz = abs(P(z)).mid()
            scale = abs(absP(acb(abs(z).mid()))).mid()
            res = pz / scale if not scale.is_zero() else pz
            dz = abs(dP(z)).mid()
            rad = (d * pz / dz).mid() if not dz.is_zero() else arb(math.inf)
            roots.append(Root(z.mid(), res.mid(), rad))
        rs = RootSet(roots, nzero + d, ctx, sweeps)
        if not ok:
            bound = arb(10) ** (-(ctx.dprec // 2) + ctx.guard)
            worst = max((r.residual for r in roots), key=lambda a: float(a.mid().log()) if not a.is_zero() else -math.inf)
            if worst > bound:
                raise RootFindingError("root finding failed at this precision; raise dprec", rs)
    return rs


# -- convergence tracking -------------------------------------------------------------


@dataclass(frozen=True)
class ConvergedRoot:
    """An eigenvalue whose chain satisfied the convergence predicate.

    ``index`` is the position among the last checkpoint's filtered roots,
    ``n`` the checkpoint where the chain first met the predicate (moved less
    than ``tol`` since the previous checkpoint) and kept meeting it through
    the last checkpoint.
    """

    index: int
    value: acb
    n: int


@dataclass
class ConvergenceTrace:
    """Filtered roots per checkpoint and the eigenvalues judged converged."""

    checkpoints: list
    converged: list = field(default_factory=list)
    tol: Fraction = Fraction(0)
    strict: bool = False
    chains: list = field(default_factory=list)

    @property
    def levels(self) -> list:
        return [n for n, _ in self.checkpoints]

    def last_roots(self) -> list:
        return self.checkpoints[-1][1] if self.checkpoints else []


def _dist_float(a: acb, b: acb) -> float:
    d = abs(a - b).mid()
    if d.is_zero():
        return 0.0
    man, exp = d.man_exp()
    return math.ldexp(float(int(man)), int(exp)) if int(exp) > -1100 else 0.0


def _match(prev: list, curr: list) -> list:
    """``match[j]`` is the index in ``prev`` paired with ``curr[j]`` or None."""
    pairs = sorted(
        ((_dist_float(a, b), i, j) for i, a in enumerate(prev) for j, b in enumerate(curr)),
        key=lambda t: (t[0], t[2], t[1]),
    )
    used_p, out = set(), [None] * len(curr)
    for _, i, j in pairs:
        if out[j] is None and i not in used_p:
            out[j] = i
            used_p.add(i)
    return out


def track(checkpoints: list, tol, strict: bool = False, radii: dict = None) -> ConvergenceTrace:
    """Chain roots across checkpoints and decide convergence.

    Parameters
    ----------
    checkpoints : list
        ``(n, roots)`` or ``(n, roots, rootset)`` tuples with increasing n.
    tol : exact rational or arb
        Tolerance.
    strict : bool
        If true a chained root converges when its inclusion radius (taken
        from the RootSet in the third tuple slot) is below ``tol``; otherwise
        when it moved less than ``tol`` since the previous checkpoint.
    """
    rows = []
    for item in checkpoints:
        n, vals = item[0], item[1]
        rs = item[2] if len(item) > 2 else None
        rows.append((n, sort_roots(list(vals)), rs))
    ns = [r[0] for r in rows]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("checkpoint levels must increase strictly")
    tolr = to_real(tol) if not isinstance(tol, arb) else tol
    links = [[None] * len(rows[0][1])] if rows else []
    for (_, prev, _), (_, curr, _) in zip(rows, rows[1:]):
        links.append(_match(prev, curr))
    trace = ConvergenceTrace([(n, v) for n, v, _ in rows], [], Fraction(tol) if not isinstance(tol, arb) else tol, strict)
    if len(rows) < 2:
        return trace
    t = len(rows) - 1
    for j, z in enumerate(rows[t][1]):
        chain = [(t, j)]
        while chain[-1][0] > 0 and links[chain[-1][0]][chain[-1][1]] is not None:
            tt, jj = chain[-1]
            chain.append((tt - 1, links[tt][jj]))
        chain.reverse()
        trace.chains.append([(rows[a][0], rows[a][1][b]) for a, b in chain])
        if len(chain) < 2:
            continue
        ok = [_close(rows, a, b, pa, pb, tolr, strict) for (pa, pb), (a, b) in zip(chain, chain[1:])]
        if not ok[-1]:
            continue
        first = len(ok) - 1
        while first > 0 and ok[first - 1]:
            first -= 1
        trace.converged.append(ConvergedRoot(j, z, rows[chain[first + 1][0]][0]))
    return trace


def _close(rows, a, b, pa, pb, tol, strict) -> bool:
    if strict:
        rs = rows[a][2]
        if rs is None:
            raise ValueError("strict tracking needs the RootSet of every checkpoint")
        z = rows[a][1][b]
        rad = min((r.radius for r in rs.roots if r.value.mid() == z.mid()), default=None, key=_radkey)
        return rad is not None and rad < tol
    return abs(rows[a][1][b] - rows[pa][1][pb]).mid() < tol


def _radkey(r):
    return float(r.mid().log()) if not r.is_zero() else -math.inf

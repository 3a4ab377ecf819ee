"""Taylor expansion of bound expressions in (x - x0) with E-polynomial coefficients.

The expansion is computed bottom-up by truncated series arithmetic.  Sums and
products use FLINT polynomial multiplication; reciprocals, ``exp``, ``log``,
``sin``/``cos`` and rational powers use the usual first-order ODE
recurrences, so every node costs O(order^2) scalar operations.

Internally a series is stored "E-major": ``terms[k]`` is the x-series that
multiplies ``E**k``.  :attr:`XSeries.coeffs` exposes the same data the other
way round, as one :class:`~aimkit.numerics.EPoly` per power of (x - x0).
"""

from __future__ import annotations

from fractions import Fraction

from flint import acb, arb, fmpq

from . import _xpoly
from .expr import (
    Add,
    Div,
    Expr,
    Func,
    ImaginaryUnit,
    Mul,
    Neg,
    PowInt,
    PowRat,
    Rational,
    Symbol,
    free_symbols,
)
from .numerics import EPoly, to_fraction

__all__ = [
    "SeriesError",
    "SingularPointError",
    "UnsupportedRingError",
    "OrderBudgetError",
    "XSeries",
    "expand_series",
    "DEFAULT_ORDER_BUDGET",
]

DEFAULT_ORDER_BUDGET = 20000


class SeriesError(ValueError):
    pass


class SingularPointError(SeriesError):
    """The expression is not analytic at the expansion point."""


class UnsupportedRingError(SeriesError):
    """The eigenvalue symbol appears where the coefficients would stop being polynomials in E."""


class OrderBudgetError(SeriesError):
    pass


class _NeedsComplex(Exception):
    pass


class XSeries:
    """Truncated series ``sum_i coeffs[i] (x - x0)^i`` with coefficients in E.

    Parameters
    ----------
    variable : str
        Name of the expansion variable.
    x0 : Fraction
        Expansion point.
    order : int
        Highest retained power of (x - x0).
    ctx : PrecisionContext or EXACT
    terms : list
        E-major FLINT polynomials (``terms[k]`` multiplies ``E**k``).
    ring : internal coefficient ring
    """

    __slots__ = ("variable", "x0", "order", "ctx", "terms", "ring")

    def __init__(self, variable, x0, order, ctx, terms, ring):
        self.variable = variable
        self.x0 = Fraction(x0)
        self.order = order
        self.ctx = ctx
        self.ring = ring
        n = order + 1
        terms = [p.truncate(n) for p in terms]
        while terms and terms[-1].length() == 0:
            terms.pop()
        self.terms = terms

    @property
    def coeffs(self) -> list:
        """One EPoly per power of (x - x0), ``order + 1`` of them."""
        n = self.order + 1
        cols = [self.ring.coeff_list(p, n) for p in self.terms]
        return [EPoly([col[i] for col in cols], self.ctx) for i in range(n)]

    @property
    def e_degree(self):
        """Highest power of E present, or None for the zero series."""
        return len(self.terms) - 1 if self.terms else None

    def __len__(self):
        return self.order + 1

    def __repr__(self):
        return f"XSeries({self.variable}, x0={self.x0}, order={self.order}, e_degree={self.e_degree})"


# -- scalar recurrences --------------------------------------------------------
#
# All functions take and return python lists of length n holding arb, acb or
# fmpq scalars.


def _recip(u, n):
    u0 = u[0]
    inv0 = 1 / u0
    g = [inv0]
    for m in range(1, n):
        s = u[1] * g[m - 1]
        for k in range(2, m + 1):
            s += u[k] * g[m - k]
        g.append(-s * inv0)
    return g


def _exp(u, n, f0):
    f = [f0]
    for m in range(1, n):
        s = u[1] * f[m - 1]
        for k in range(2, m + 1):
            s += k * u[k] * f[m - k]
        f.append(s / m)
    return f


def _log(u, n, f0):
    # u f' = u'  =>  m u0 f_m = m u_m - sum_{k=1}^{m-1} k f_k u_{m-k}
    inv0 = 1 / u[0]
    f = [f0]
    for m in range(1, n):
        s = m * u[m]
        for k in range(1, m):
            s -= k * f[k] * u[m - k]
        f.append(s * inv0 / m)
    return f


def _pow(u, n, q, f0):
    # u f' = q u' f  =>  m u0 f_m = sum_{k=1}^{m} ((q+1)k - m) u_k f_{m-k}
    inv0 = 1 / u[0]
    f = [f0]
    for m in range(1, n):
        s = u[0] * 0
        for k in range(1, m + 1):
            s += ((q + 1) * k - m) * u[k] * f[m - k]
        f.append(s * inv0 / m)
    return f


def _sincos(u, n, s0, c0):
    s, c = [s0], [c0]
    for m in range(1, n):
        a = u[1] * c[m - 1]
        b = u[1] * s[m - 1]
        for k in range(2, m + 1):
            a += k * u[k] * c[m - k]
            b += k * u[k] * s[m - k]
        s.append(a / m)
        c.append(-b / m)
    return s, c


# -- bivariate series arithmetic -----------------------------------------------------


class _Expander:
    def __init__(self, eigen, var, x0, order, ctx, ring):
        self.eigen = eigen
        self.var = var
        self.x0 = Fraction(x0)
        self.n = order + 1
        self.ctx = ctx
        self.ring = ring

    # helpers on E-major lists
    def const(self, v):
        return [self.ring.make([self.ring.scalar(v)])]

    def add(self, a, b):
        out = list(a) + [self.ring.zero()] * max(0, len(b) - len(a))
        for k, p in enumerate(b):
            out[k] = out[k] + p
        return out

    def neg(self, a):
        return [-p for p in a]

    def mul(self, a, b):
        if not a or not b:
            return []
        out = [self.ring.zero()] * (len(a) + len(b) - 1)
        for i, p in enumerate(a):
            for j, q in enumerate(b):
                out[i + j] = out[i + j] + self.ring.mul_trunc(p, q, self.n)
        return out

    def efree(self, a, what):
        if len(a) > 1 and any(p.length() for p in a[1:]):
            raise UnsupportedRingError(f"the eigenvalue symbol {self.eigen!r} may not appear in {what}")
        return a[0] if a else self.ring.zero()

    def scalars(self, p):
        return self.ring.coeff_list(p, self.n)

    def from_scalars(self, cs):
        return [self.ring.make(cs)]

    def nonzero_constant(self, u, what):
        u0 = u[0]
        if self.ring.exact:
            if u0 == 0:
                raise SingularPointError(f"{what} vanishes at {self.var} = {self.x0}")
        elif u0.contains(0):
            raise SingularPointError(f"{what} vanishes at {self.var} = {self.x0}")
        return u0

    # seeds of transcendental nodes: exact scalar evaluation at the point
    def seed(self, fn, u0):
        if self.ring.exact:
            raise UnsupportedRingError(f"{fn} has no exact rational series; use a numeric precision context")
        z = u0 if self.ring is _xpoly.COMPLEX else acb(u0)
        v = getattr(z, fn)()
        if self.ring is _xpoly.REAL:
            if not v.imag.is_zero():
                raise _NeedsComplex()
            return v.real
        return v

    # expansion
    def go(self, e: Expr):
        if isinstance(e, Rational):
            return self.const(e.value)
        if isinstance(e, ImaginaryUnit):
            if self.ring is not _xpoly.COMPLEX:
                raise _NeedsComplex()
            return [self.ring.make([acb(0, 1)])]
        if isinstance(e, Symbol):
            if e.name == self.var:
                cs = [self.ring.scalar(self.x0), self.ring.scalar(1)]
                return [self.ring.make(cs[: self.n])]
            if e.name == self.eigen:
                return [self.ring.zero(), self.ring.make([self.ring.scalar(1)])]
            raise SeriesError(f"unbound symbol {e.name!r} in series expansion")
        if isinstance(e, Neg):
            return self.neg(self.go(e.arg))
        if isinstance(e, Add):
            out = []
            for a in e.args:
                out = self.add(out, self.go(a))
            return out
        if isinstance(e, Mul):
            out = self.go(e.args[0])
            for a in e.args[1:]:
                out = self.mul(out, self.go(a))
            return out
        if isinstance(e, Div):
            num = self.go(e.num)
            den = self.efree(self.go(e.den), "a denominator")
            return self.mul(num, self.from_scalars(self.reciprocal(den, "denominator " + str(e.den))))
        if isinstance(e, PowInt):
            return self.powint(e)
        if isinstance(e, PowRat):
            u = self.scalars(self.efree(self.go(e.base), "a rational power"))
            u0 = self.nonzero_constant(u, f"base of {e}")
            q = self.ring.scalar(e.exp) if not self.ring.exact else None
            if self.ring.exact:
                raise UnsupportedRingError("rational powers have no exact rational series")
            f0 = self.powseed(u0, e.exp)
            return self.from_scalars(_pow(u, self.n, q, f0))
        if isinstance(e, Func):
            return self.func(e)
        raise TypeError(f"unknown node {e!r}")

    def reciprocal(self, p, what):
        u = self.scalars(p)
        self.nonzero_constant(u, what)
        return _recip(u, self.n)

    def powint(self, e: PowInt):
        base = self.go(e.base)
        k = e.exp
        if k == 0:
            return self.const(1)
        if k < 0:
            base = self.from_scalars(self.reciprocal(self.efree(base, "a negative power"), f"base of {e}"))
            k = -k
        out = None
        while k:
            if k & 1:
                out = base if out is None else self.mul(out, base)
            k >>= 1
            if k:
                base = self.mul(base, base)
        return out

    def powseed(self, u0, q: Fraction):
        if self.ring.exact:
            raise UnsupportedRingError("rational powers have no exact rational series")
        z = u0 if self.ring is _xpoly.COMPLEX else acb(u0)
        if q == Fraction(1, 2):
            v = z.sqrt()
        else:
            v = (z.log() * acb(arb(fmpq(q.numerator, q.denominator)))).exp()
        if self.ring is _xpoly.REAL:
            if not v.imag.is_zero():
                raise _NeedsComplex()
            return v.real
        return v

    def func(self, e: Func):
        u = self.scalars(self.efree(self.go(e.arg), f"{e.name}()"))
        n = self.n
        if e.name == "exp":
            return self.from_scalars(_exp(u, n, self.seed("exp", u[0])))
        if e.name == "log":
            self.nonzero_constant(u, f"argument of {e}")
            return self.from_scalars(_log(u, n, self.seed("log", u[0])))
        if e.name == "sqrt":
            self.nonzero_constant(u, f"argument of {e}")
            return self.from_scalars(_pow(u, n, self.ring.scalar(Fraction(1, 2)), self.powseed(u[0], Fraction(1, 2))))
        s, c = _sincos(u, n, self.seed("sin", u[0]), self.seed("cos", u[0]))
        return self.from_scalars(s if e.name == "sin" else c)


def _has_imaginary(e: Expr) -> bool:
    if isinstance(e, ImaginaryUnit):
        return True
    return any(_has_imaginary(c) for c in e.children())


def expand_series(e: Expr, eigen: str, var: str, x0, order: int, ctx, budget: int = DEFAULT_ORDER_BUDGET) -> XSeries:
    """Taylor-expand ``e`` about ``var = x0`` up to and including ``(var - x0)**order``.

    Parameters
    ----------
    e : Expr
        Expression whose only free symbols are ``eigen`` and ``var``.
    eigen, var : str
        Eigenvalue symbol and expansion variable.
    x0 : exact rational
        Expansion point.
    order : int
        Highest retained power (>= 0).
    ctx : PrecisionContext or EXACT
        Numeric precision, or exact rational arithmetic (no transcendentals).
    budget : int
        Largest order accepted.

    Returns
    -------
    XSeries

    Raises
    ------
    SingularPointError
        if a denominator, logarithm or fractional power base vanishes at x0.
    UnsupportedRingError
        if ``eigen`` appears in a denominator, a function or a rational power,
        or a transcendental node is expanded exactly.
    OrderBudgetError
        if ``order`` exceeds ``budget``.
    """
    if int(order) != order or order < 0:
        raise ValueError(f"order must be a non-negative integer, got {order!r}")
    if order > budget:
        raise OrderBudgetError(f"order {order} exceeds the configured budget of {budget}")
    extra = free_symbols(e) - {eigen, var}
    if extra:
        raise SeriesError("unbound symbol(s) in series expansion: " + ", ".join(sorted(extra)))
    x0 = to_fraction(x0)
    if ctx.exact:
        if _has_imaginary(e):
            raise UnsupportedRingError("exact expansion supports real rationals only")
        ring = _xpoly.EXACT_RING
    else:
        ring = _xpoly.COMPLEX if _has_imaginary(e) else _xpoly.REAL
    with ctx.active():
        try:
            terms = _Expander(eigen, var, x0, order, ctx, ring).go(e)
        except _NeedsComplex:
            ring = _xpoly.COMPLEX
            terms = _Expander(eigen, var, x0, order, ctx, ring).go(e)
        return XSeries(var, x0, order, ctx, terms, ring)

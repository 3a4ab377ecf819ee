"""Arbitrary-precision scalars and the polynomial ring in the eigenvalue symbol.

Scalars are python-flint ``arb``/``acb`` values.  FLINT keeps its working
precision in a process-wide setting, so every computation here runs inside
:meth:`PrecisionContext.active`, which installs the context's precision under
a re-entrant lock and restores the previous value afterwards.  Values never
carry mutable precision state of their own.

:class:`EPoly` is a univariate polynomial in the eigenvalue symbol ``E``.  It
has two coefficient rings:

* numeric -- complex ball midpoints at the precision of a
  :class:`PrecisionContext`;
* exact -- rationals (``fmpq``), selected with the :data:`EXACT` context.
  Only used by the symbolic test oracles.
"""

from __future__ import annotations

import math
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import flint
from flint import acb, acb_poly, arb, fmpq, fmpq_poly, fmpz

__all__ = [
    "ContextError",
    "PrecisionContext",
    "ExactContext",
    "EXACT",
    "EPoly",
    "to_real",
    "to_complex",
    "to_fraction",
    "format_fixed",
    "format_sci",
]

LOG2_10 = math.log2(10)
_FLINT_LOCK = threading.RLock()


class ContextError(ValueError):
    """Operands belong to different precision contexts."""


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision in decimal digits plus internal guard digits.

    Parameters
    ----------
    dprec : int
        Decimal digits every reported quantity is computed to (>= 15).
    guard : int
        Extra decimal digits carried internally.
    """

    dprec: int = 50
    guard: int = 20

    def __post_init__(self):
        if int(self.dprec) != self.dprec or self.dprec < 15:
            raise ValueError(f"dprec must be an integer >= 15, got {self.dprec!r}")
        if int(self.guard) != self.guard or self.guard < 0:
            raise ValueError(f"guard must be a non-negative integer, got {self.guard!r}")

    exact = False

    @property
    def bits(self) -> int:
        """Binary working precision, ``ceil((dprec + guard) * log2(10)) + 4``.

        The four extra bits cover arb's one-ulp rounding so that a converted
        rational stays within ``10^-(dprec+guard)`` relative.
        """
        return math.ceil((self.dprec + self.guard) * LOG2_10) + 4

    @property
    def trim_threshold(self) -> arb:
        """Relative magnitude below which a leading coefficient is dropped."""
        return arb(10) ** (self.guard - self.dprec)

    @contextmanager
    def active(self):
        """Run the enclosed FLINT operations at this context's precision."""
        with _FLINT_LOCK:
            old = flint.ctx.prec
            flint.ctx.prec = self.bits
            try:
                yield self
            finally:
                flint.ctx.prec = old

    def doubled(self) -> "PrecisionContext":
        return PrecisionContext(2 * self.dprec, self.guard)


@contextmanager
def bits_precision(bits: int):
    """Temporarily run FLINT at ``bits`` binary digits (internal helper)."""
    with _FLINT_LOCK:
        old = flint.ctx.prec
        flint.ctx.prec = int(bits)
        try:
            yield
        finally:
            flint.ctx.prec = old


class ExactContext:
    """Marker context for exact rational coefficient arithmetic."""

    exact = True
    dprec = None
    guard = 0

    @contextmanager
    def active(self):
        yield self

    def __repr__(self):
        return "EXACT"

    def __reduce__(self):
        return "EXACT"


EXACT = ExactContext()


# -- scalar conversion -----------------------------------------------------


def to_fraction(value) -> Fraction:
    """Exact rational from int, Fraction, fmpq/fmpz or a ``p/q`` string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, fmpq):
        return Fraction(int(value.p), int(value.q))
    if isinstance(value, fmpz):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def _fmpq(f: Fraction) -> fmpq:
    return fmpq(f.numerator, f.denominator)


def to_real(value) -> arb:
    """Convert to ``arb`` at the currently active precision.

    Exact rationals are rounded once, correctly, to the working precision.
    """
    if isinstance(value, arb):
        return value
    if isinstance(value, acb):
        if not value.imag.is_zero():
            raise ValueError("value has a nonzero imaginary part")
        return value.real
    if isinstance(value, (int, Fraction, fmpq, fmpz)):
        return arb(_fmpq(to_fraction(value)))
    if isinstance(value, float):
        return arb(value)
    if isinstance(value, str):
        return arb(value)
    raise TypeError(f"cannot convert {type(value).__name__} to arb")


def to_complex(value) -> acb:
    """Convert to ``acb`` at the currently active precision."""
    if isinstance(value, acb):
        return value
    if isinstance(value, complex):
        return acb(value.real, value.imag)
    if isinstance(value, tuple):
        re, im = value
        return acb(to_real(re), to_real(im))
    return acb(to_real(value))


def _arb_fraction(x: arb) -> Fraction:
    man, exp = x.mid().man_exp()
    man, exp = int(man), int(exp)
    return Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2**-exp)


def format_fixed(x, digits: int, width: int = 0) -> str:
    """Midpoint of ``x`` rounded half-even to ``digits`` fraction digits."""
    if isinstance(x, acb):
        x = x.real
    q = _arb_fraction(to_real(x)) if not isinstance(x, Fraction) else x
    scaled = round(q * 10**digits)
    sign = "-" if scaled < 0 or (scaled == 0 and q < 0) else ""
    s = str(abs(scaled)).rjust(digits + 1, "0")
    body = f"{s[:-digits]}.{s[-digits:]}" if digits else s
    return f"{sign}{body}".rjust(width)


def format_sci(x: arb, digits: int) -> str:
    """Midpoint of ``x`` as a decimal string with ``digits`` significant digits."""
    x = x.mid()
    if x.is_zero():
        return "0"
    return x.str(digits, radius=False)


# -- polynomials in E --------------------------------------------------------


def _check_ctx(a, b):
    if a is not b and a != b:
        raise ContextError(f"mismatched contexts {a!r} and {b!r}")


class EPoly:
    """Polynomial in the eigenvalue symbol with coefficients in ascending degree.

    Numeric instances hold complex midpoints at the precision of ``ctx``;
    instances built with ``ctx=EXACT`` hold exact rationals.  Instances are
    normalized on construction and never mutated.
    """

    __slots__ = ("_p", "ctx")

    def __init__(self, coeffs=(), ctx=None):
        if ctx is None:
            raise ValueError("an EPoly needs a context (PrecisionContext or EXACT)")
        self.ctx = ctx
        if ctx.exact:
            self._p = fmpq_poly([_fmpq(to_fraction(c)) for c in coeffs])
        else:
            with ctx.active():
                self._p = _normalize(acb_poly([to_complex(c).mid() for c in coeffs]), ctx, None)

    @classmethod
    def _wrap(cls, p, ctx, scale=None) -> "EPoly":
        # ``scale`` bounds the magnitude of the operand terms behind each
        # coefficient; a leading coefficient is dropped only when it is
        # negligible against that scale (i.e. it is cancellation noise).
        out = object.__new__(cls)
        out.ctx = ctx
        if ctx.exact:
            out._p = p
        else:
            with ctx.active():
                out._p = _normalize(acb_poly([c.mid() for c in p.coeffs()]), ctx, scale)
        return out

    @classmethod
    def zero(cls, ctx) -> "EPoly":
        return cls((), ctx)

    @classmethod
    def constant(cls, c, ctx) -> "EPoly":
        return cls((c,), ctx)

    @classmethod
    def gen(cls, ctx) -> "EPoly":
        """The eigenvalue symbol itself."""
        return cls((0, 1), ctx)

    # -- structure ----------------------------------------------------------

    @property
    def coeffs(self) -> tuple:
        return tuple(self._p.coeffs())

    @property
    def degree(self):
        """Degree in E; ``None`` for the zero polynomial."""
        d = self._p.degree()
        return None if d < 0 else d

    def is_zero(self) -> bool:
        return self._p.degree() < 0

    def __len__(self):
        return self._p.length()

    def __getitem__(self, i):
        if i < 0 or i >= self._p.length():
            return fmpq(0) if self.ctx.exact else acb(0)
        return self._p[i]

    def __repr__(self):
        return f"EPoly({list(self.coeffs)!r}, ctx={self.ctx!r})"

    def __str__(self):
        if self.is_zero():
            return "0"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            cs = str(c) if self.ctx.exact else _short(c)
            terms.append(cs if k == 0 else f"({cs})*E" + (f"^{k}" if k > 1 else ""))
        return " + ".join(terms)

    # -- ring operations ----------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, EPoly):
            _check_ctx(self.ctx, other.ctx)
            return other._p
        if self.ctx.exact:
            return fmpq_poly([_fmpq(to_fraction(other))])
        with self.ctx.active():
            return acb_poly([to_complex(other)])

    def _addscale(self, q):
        if self.ctx.exact:
            return None
        return _abs_poly(self._p) + _abs_poly(q)

    def __add__(self, other):
        q = self._coerce(other)
        with self.ctx.active():
            return EPoly._wrap(self._p + q, self.ctx, self._addscale(q))

    __radd__ = __add__

    def __sub__(self, other):
        q = self._coerce(other)
        with self.ctx.active():
            return EPoly._wrap(self._p - q, self.ctx, self._addscale(q))

    def __rsub__(self, other):
        q = self._coerce(other)
        with self.ctx.active():
            return EPoly._wrap(q - self._p, self.ctx, self._addscale(q))

    def __neg__(self):
        with self.ctx.active():
            return EPoly._wrap(-self._p, self.ctx)

    def __mul__(self, other):
        q = self._coerce(other)
        with self.ctx.active():
            scale = None if self.ctx.exact else _abs_poly(self._p) * _abs_poly(q)
            return EPoly._wrap(self._p * q, self.ctx, scale)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, EPoly):
            return NotImplemented
        if self.ctx != other.ctx:
            return False
        if self.ctx.exact:
            return self._p == other._p
        a, b = self.coeffs, other.coeffs
        return len(a) == len(b) and all(x.mid() == y.mid() for x, y in zip(a, b))

    __hash__ = None

    def derivative(self) -> "EPoly":
        with self.ctx.active():
            return EPoly._wrap(self._p.derivative(), self.ctx)

    def __call__(self, z):
        return self.eval(z)

    def eval(self, z):
        """Horner evaluation at ``z`` (working precision dprec + guard)."""
        if self.ctx.exact:
            if isinstance(z, (int, Fraction, fmpq, fmpz)):
                return self._p(_fmpq(to_fraction(z)))
            raise TypeError("exact polynomials evaluate at rationals only")
        with self.ctx.active():
            z = to_complex(z)
            if self.is_zero():
                return acb(0)
            return self._p(z)

    def max_abs(self) -> arb:
        with self.ctx.active():
            return max((abs(c).mid() for c in self.coeffs), default=arb(0), key=_key)

    def monic(self) -> "EPoly":
        """Divide by the leading coefficient; roots are unchanged."""
        if self.is_zero():
            raise ZeroDivisionError("the zero polynomial has no leading coefficient")
        lead = self._p[self._p.degree()]
        with self.ctx.active():
            return EPoly._wrap(self._p * (1 / lead), self.ctx)

    def allclose(self, other: "EPoly", rtol) -> bool:
        """Coefficientwise agreement relative to the larger max-coefficient."""
        _check_ctx(self.ctx, other.ctx)
        with self.ctx.active():
            scale = max(self.max_abs(), other.max_abs(), key=_key)
            if scale.is_zero():
                return True
            diff = self - other
            return all(abs(c).mid() <= to_real(rtol) * scale for c in diff.coeffs)

    # -- exact helpers ------------------------------------------------------

    def to_fractions(self) -> list:
        if not self.ctx.exact:
            raise TypeError("numeric polynomial; use coeffs")
        return [Fraction(int(c.p), int(c.q)) for c in self.coeffs]

    def to_numeric(self, ctx: PrecisionContext) -> "EPoly":
        if self.ctx.exact:
            return EPoly([to_fraction(c) for c in self.coeffs], ctx)
        return EPoly(self.coeffs, ctx)


def _key(x: arb) -> float:
    return float(x.mid().log()) if not x.is_zero() else -math.inf


def _short(c: acb) -> str:
    if c.imag.is_zero():
        return c.real.mid().str(10, radius=False)
    return f"{c.real.mid().str(10, radius=False)}{'+' if c.imag > 0 else '-'}{abs(c.imag).mid().str(10, radius=False)}*I"


def _abs_poly(p: acb_poly) -> acb_poly:
    return acb_poly([abs(c).mid() for c in p.coeffs()])


def _normalize(p: acb_poly, ctx: PrecisionContext, scale) -> acb_poly:
    """Drop leading coefficients that are zero or pure cancellation noise.

    With ``scale`` given, coefficient k is noise when
    ``|p_k| <= trim_threshold * scale_k``; without it only exact zeros go.
    Magnitudes are never compared across degrees: the coefficients of the
    quantization polynomials legitimately span many orders of magnitude.
    """
    cs = p.coeffs()
    n = len(cs)
    while n:
        c = cs[n - 1]
        if c.is_zero():
            n -= 1
            continue
        if scale is None or n > scale.length():
            break
        if abs(c).mid() <= ctx.trim_threshold * abs(scale[n - 1]).mid():
            n -= 1
            continue
        break
    return p if n == len(cs) else acb_poly(cs[:n])

"""Truncated polynomials in (x - x0) over the three coefficient rings.

The AIM kernel and the series expander both store bivariate data "E-major":
a list indexed by the power of E whose entries are FLINT polynomials in
(x - x0).  This module hides which FLINT type is used:

* ``arb_poly`` when every coefficient is real (the common, faster case),
* ``acb_poly`` when an imaginary unit is involved,
* ``fmpq_poly`` for exact rational work (``EXACT`` context).
"""

from __future__ import annotations

from flint import acb, acb_poly, arb, arb_poly, fmpq, fmpq_poly

from .numerics import to_fraction


class Ring:
    """Scalar and polynomial constructors plus truncated products."""

    name = "ring"
    poly = None
    exact = False

    def scalar(self, v):
        raise NotImplementedError

    def make(self, coeffs):
        return self.poly(list(coeffs))

    def zero(self):
        return self.poly([])

    def mul_trunc(self, a, b, n: int):
        """``a*b mod (x-x0)^n``."""
        if n <= 0:
            return self.poly([])
        return (a.truncate(n) * b.truncate(n)).truncate(n)

    def coeff(self, p, i):
        return p[i] if i < p.length() else self.scalar(0)

    def coeff_list(self, p, n):
        cs = p.coeffs()
        z = self.scalar(0)
        return list(cs[:n]) + [z] * (n - len(cs))


class RealRing(Ring):
    name = "real"
    poly = arb_poly

    def scalar(self, v):
        if isinstance(v, arb):
            return v
        if isinstance(v, acb):
            return v.real
        return arb(fmpq(*_pq(v))) if not isinstance(v, float) else arb(v)


class ComplexRing(Ring):
    name = "complex"
    poly = acb_poly

    def scalar(self, v):
        if isinstance(v, acb):
            return v
        if isinstance(v, arb):
            return acb(v)
        return acb(arb(fmpq(*_pq(v))))


class ExactRing(Ring):
    name = "exact"
    poly = fmpq_poly
    exact = True

    def scalar(self, v):
        if isinstance(v, fmpq):
            return v
        return fmpq(*_pq(v))

    def mul_trunc(self, a, b, n: int):
        if n <= 0:
            return fmpq_poly([])
        return a.mul_low(b, n)


def _pq(v):
    f = to_fraction(v)
    return f.numerator, f.denominator


REAL = RealRing()
COMPLEX = ComplexRing()
EXACT_RING = ExactRing()


def promote(ring: Ring, p):
    """Convert a polynomial of ``ring`` to the complex ring."""
    if ring is COMPLEX:
        return p
    return acb_poly([acb(c) for c in p.coeffs()])

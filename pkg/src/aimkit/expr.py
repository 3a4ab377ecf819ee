"""Expression trees for lambda_0 / s_0 and their exact parameter binding.

Grammar (all literals are exact rationals; decimal points are rejected)::

    expr     := term (('+'|'-') term)*
    term     := factor (('*'|'/') factor)*
    factor   := '-' factor | base ('^' exponent)?
    base     := rational | 'I' | symbol | func '(' expr ')' | '(' expr ')'
    exponent := signed-integer ('^' exponent)? | '(' rational ')'
    rational := integer ('/' positive-integer)?
    func     := 'exp' | 'log' | 'sin' | 'cos' | 'sqrt'

A literal fraction binds as one number, so ``2/3^2`` is ``(2/3)^2``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

from flint import acb

from .numerics import to_complex, to_fraction

__all__ = [
    "Expr",
    "Rational",
    "ImaginaryUnit",
    "Symbol",
    "Neg",
    "Add",
    "Mul",
    "Div",
    "PowInt",
    "PowRat",
    "Func",
    "FUNCTIONS",
    "ExprSyntaxError",
    "UnboundSymbolError",
    "BindingError",
    "parse_expression",
    "bind_parameters",
    "free_symbols",
    "substitute",
    "fold_constants",
    "exact_value",
    "evaluate",
    "lambdify",
]

FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt")


class ExprSyntaxError(ValueError):
    """Malformed expression text; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class UnboundSymbolError(ValueError):
    def __init__(self, names):
        self.names = sorted(names)
        super().__init__("unbound symbol(s): " + ", ".join(self.names))


class BindingError(ValueError):
    pass


# -- AST -------------------------------------------------------------------


class Expr:
    """Base class of expression nodes (immutable, structurally comparable)."""

    __slots__ = ()

    def children(self) -> tuple:
        return ()

    def __str__(self):
        return _render(self, 0)


@dataclass(frozen=True)
class Rational(Expr):
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class ImaginaryUnit(Expr):
    pass


@dataclass(frozen=True)
class Symbol(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Add(Expr):
    args: tuple

    def children(self):
        return self.args


@dataclass(frozen=True)
class Mul(Expr):
    args: tuple

    def children(self):
        return self.args


@dataclass(frozen=True)
class Div(Expr):
    num: Expr
    den: Expr

    def children(self):
        return (self.num, self.den)


@dataclass(frozen=True)
class PowInt(Expr):
    base: Expr
    exp: int

    def children(self):
        return (self.base,)


@dataclass(frozen=True)
class PowRat(Expr):
    base: Expr
    exp: Fraction

    def children(self):
        return (self.base,)


@dataclass(frozen=True)
class Func(Expr):
    name: str
    arg: Expr

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise ValueError(f"unknown function {self.name!r}")

    def children(self):
        return (self.arg,)


_PREC = {Add: 1, Neg: 2, Mul: 3, Div: 3, PowInt: 4, PowRat: 4}


def _render(e: Expr, parent: int) -> str:
    if isinstance(e, Rational):
        v = e.value
        s = str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        need = v < 0 or v.denominator != 1
        return f"({s})" if need and parent >= 3 else s
    if isinstance(e, ImaginaryUnit):
        return "I"
    if isinstance(e, Symbol):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({_render(e.arg, 0)})"
    prec = _PREC[type(e)]
    if isinstance(e, Add):
        parts = [_render(e.args[0], prec)]
        for a in e.args[1:]:
            if isinstance(a, Neg):
                parts.append(f" - {_render(a.arg, prec + 1)}")
            elif isinstance(a, Rational) and a.value < 0:
                parts.append(f" - {_render(Rational(-a.value), prec + 1)}")
            else:
                parts.append(f" + {_render(a, prec)}")
        s = "".join(parts)
    elif isinstance(e, Neg):
        s = f"-{_render(e.arg, prec + 1)}"
    elif isinstance(e, Mul):
        s = "*".join(_render(a, prec) for a in e.args)
    elif isinstance(e, Div):
        s = f"{_render(e.num, prec)}/{_render(e.den, prec + 1)}"
    elif isinstance(e, PowInt):
        s = f"{_render(e.base, prec + 1)}^{e.exp}" if e.exp >= 0 else f"{_render(e.base, prec + 1)}^({e.exp})"
    else:
        s = f"{_render(e.base, prec + 1)}^({e.exp})"
    return f"({s})" if prec < parent or (prec == parent and isinstance(e, (Neg, PowInt, PowRat))) else s


# -- parser ----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+[eE][+-]?\d)|(\d+)|([A-Za-z][A-Za-z0-9_]*)|(\S))")


def _tokenize(text: str):
    pos = 0
    out = []
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:  # trailing whitespace
            break
        start = m.start(m.lastindex)
        if m.group(1):
            raise ExprSyntaxError("malformed rational: decimal literals are not allowed, use p/q", start, text)
        if m.group(2):
            out.append(("int", int(m.group(2)), start))
        elif m.group(3):
            out.append(("name", m.group(3), start))
        else:
            out.append(("op", m.group(4), start))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return ExprSyntaxError(msg, _byte_offset(self.text, tok[2]), self.text)

    def expect(self, op):
        tok = self.next()
        if tok[0] != "op" or tok[1] != op:
            raise self.error(f"expected {op!r}", tok)

    def parse(self) -> Expr:
        if self.peek()[0] == "end":
            raise self.error("empty expression")
        e = self.expr()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected {self.peek()[1]!r}")
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.next()[1]
            t = self.term()
            terms.append(t if op == "+" else Neg(t))
        return terms[0] if len(terms) == 1 else Add(tuple(_flatten(Add, terms)))

    def term(self) -> Expr:
        e = self.factor()
        # -a*b is read as -(a*b); same value, flatter tree
        neg = isinstance(e, Neg) and self.peek()[0] == "op" and self.peek()[1] in "*/"
        if neg:
            e = e.arg
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.next()[1]
            f = self.factor()
            if op == "*":
                e = Mul(tuple(_flatten(Mul, [e, f])))
            else:
                e = Div(e, f)
        return Neg(e) if neg else e

    def factor(self) -> Expr:
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.next()
            return Neg(self.factor())
        base = self.base()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.next()
            exp = self.exponent()
            if isinstance(exp, int):
                return PowInt(base, exp)
            return PowInt(base, exp.numerator) if exp.denominator == 1 else PowRat(base, exp)
        return base

    def signed_int(self) -> int:
        sign = 1
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.next()
            sign = -1 if tok[1] == "-" else 1
        tok = self.next()
        if tok[0] != "int":
            raise self.error("expected an integer exponent", tok)
        return sign * tok[1]

    def exponent(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "(":
            self.next()
            num = self.signed_int()
            den = 1
            if self.peek()[0] == "op" and self.peek()[1] == "/":
                self.next()
                dtok = self.next()
                if dtok[0] != "int":
                    raise self.error("malformed rational exponent", dtok)
                if dtok[1] == 0:
                    raise self.error("malformed rational: zero denominator", dtok)
                den = dtok[1]
            self.expect(")")
            return Fraction(num, den)
        value = self.signed_int()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.next()
            inner = self.exponent()
            if not isinstance(inner, int) and inner.denominator != 1:
                raise self.error("exponent tower must be integral")
            inner = int(inner)
            if inner < 0:
                raise self.error("negative exponent inside an exponent tower")
            value = value**inner
        return value

    def base(self) -> Expr:
        tok = self.next()
        kind, val, _ = tok
        if kind == "int":
            if self.peek()[0] == "op" and self.peek()[1] == "/" and self.toks[self.i + 1][0] == "int":
                self.next()
                dtok = self.next()
                if dtok[1] == 0:
                    raise self.error("malformed rational: zero denominator", dtok)
                return Rational(Fraction(val, dtok[1]))
            return Rational(Fraction(val))
        if kind == "name":
            if val == "I":
                return ImaginaryUnit()
            if self.peek()[0] == "op" and self.peek()[1] == "(":
                if val not in FUNCTIONS:
                    raise self.error(f"unknown function name {val!r}", tok)
                self.next()
                arg = self.expr()
                self.expect(")")
                return Func(val, arg)
            if val in FUNCTIONS:
                raise self.error(f"function {val!r} needs an argument", tok)
            return Symbol(val)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "end":
            raise self.error("unexpected end of expression", tok)
        raise self.error(f"unexpected {val!r}", tok)


def _byte_offset(text: str, char_offset: int) -> int:
    return len(text[:char_offset].encode())


def _flatten(cls, items):
    for it in items:
        if isinstance(it, cls):
            yield from it.args
        else:
            yield it


def parse_expression(text: str) -> Expr:
    """Parse expression text into an AST.

    >>> str(parse_expression("2*beta - 2/r"))
    '2*beta - 2/r'
    """
    return _Parser(text).parse()


# -- traversal helpers ---------------------------------------------------------


def free_symbols(e: Expr) -> set:
    if isinstance(e, Symbol):
        return {e.name}
    out = set()
    for c in e.children():
        out |= free_symbols(c)
    return out


def _rebuild(e: Expr, kids: list) -> Expr:
    if isinstance(e, Neg):
        return Neg(kids[0])
    if isinstance(e, Add):
        return Add(tuple(_flatten(Add, kids)))
    if isinstance(e, Mul):
        return Mul(tuple(_flatten(Mul, kids)))
    if isinstance(e, Div):
        return Div(kids[0], kids[1])
    if isinstance(e, PowInt):
        return PowInt(kids[0], e.exp)
    if isinstance(e, PowRat):
        return PowRat(kids[0], e.exp)
    if isinstance(e, Func):
        return Func(e.name, kids[0])
    return e


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace symbols by expressions (no simplification)."""
    if isinstance(e, Symbol):
        return mapping.get(e.name, e)
    kids = e.children()
    if not kids:
        return e
    return _rebuild(e, [substitute(k, mapping) for k in kids])


# -- exact constants -----------------------------------------------------------

# Gaussian rationals as (re, im) Fraction pairs.


def _gmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _gdiv(a, b):
    den = b[0] * b[0] + b[1] * b[1]
    if den == 0:
        raise ZeroDivisionError("division by zero in a constant expression")
    return ((a[0] * b[0] + a[1] * b[1]) / den, (a[1] * b[0] - a[0] * b[1]) / den)


def _gpow(a, k: int):
    out = (Fraction(1), Fraction(0))
    base = a
    if k < 0:
        base = _gdiv((Fraction(1), Fraction(0)), a)
        k = -k
    while k:
        if k & 1:
            out = _gmul(out, base)
        base = _gmul(base, base)
        k >>= 1
    return out


class NotExactError(ValueError):
    """Constant expression that has no exact rational value."""


def exact_value(e: Expr):
    """Exact value of a symbol-free, function-free expression.

    Returns a ``Fraction`` for real results and a ``(re, im)`` pair of
    ``Fraction`` otherwise.  Raises :class:`NotExactError` if a
    transcendental function or irrational power is involved.
    """
    v = _gval(e)
    return v[0] if v[1] == 0 else v


def _gval(e: Expr):
    if isinstance(e, Rational):
        return (e.value, Fraction(0))
    if isinstance(e, ImaginaryUnit):
        return (Fraction(0), Fraction(1))
    if isinstance(e, Symbol):
        raise UnboundSymbolError([e.name])
    if isinstance(e, Neg):
        a = _gval(e.arg)
        return (-a[0], -a[1])
    if isinstance(e, Add):
        re_, im_ = Fraction(0), Fraction(0)
        for a in e.args:
            v = _gval(a)
            re_ += v[0]
            im_ += v[1]
        return (re_, im_)
    if isinstance(e, Mul):
        out = (Fraction(1), Fraction(0))
        for a in e.args:
            out = _gmul(out, _gval(a))
        return out
    if isinstance(e, Div):
        return _gdiv(_gval(e.num), _gval(e.den))
    if isinstance(e, PowInt):
        return _gpow(_gval(e.base), e.exp)
    if isinstance(e, PowRat):
        b = _gval(e.base)
        if b[1] == 0 and b[0] >= 0:
            root = _rational_root(b[0], e.exp.denominator)
            if root is not None:
                return _gpow((root, Fraction(0)), e.exp.numerator)
        raise NotExactError(f"{_render(e, 0)} is not an exact rational")
    raise NotExactError(f"{_render(e, 0)} is not an exact rational")


def _rational_root(q: Fraction, k: int):
    def iroot(n):
        r = round(n ** (1.0 / k)) if n < 2**1000 else int(math.isqrt(n))
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand**k == n:
                return cand
        lo, hi = 0, n + 1
        while lo < hi:
            mid = (lo + hi) // 2
            if mid**k < n:
                lo = mid + 1
            else:
                hi = mid
        return lo if lo**k == n else None

    a, b = iroot(q.numerator), iroot(q.denominator)
    return None if a is None or b is None else Fraction(a, b)


def _const_expr(v) -> Expr:
    if isinstance(v, Fraction):
        return Rational(v)
    re_, im_ = v
    if im_ == 0:
        return Rational(re_)
    imag = ImaginaryUnit() if im_ == 1 else Mul((Rational(im_), ImaginaryUnit()))
    return imag if re_ == 0 else Add((Rational(re_), imag))


def fold_constants(e: Expr) -> Expr:
    """Collapse every exactly-evaluable subtree to a single constant."""
    if isinstance(e, (Rational, ImaginaryUnit, Symbol)):
        return e
    if not free_symbols(e):
        try:
            return _const_expr(exact_value(e))
        except NotExactError:
            pass
    kids = [fold_constants(k) for k in e.children()]
    if isinstance(e, (Add, Mul)):
        flags = [_is_exact(k) for k in kids]
        consts = [k for k, f in zip(kids, flags) if f]
        if consts:
            first = flags.index(True)
            rest = [k for k, f in zip(kids, flags) if not f]
            if isinstance(e, Add):
                total = exact_value(Add(tuple(consts)))
                lead = [] if total == 0 else [_const_expr(total)]
                kids = rest[:first] + lead + rest[first:]
                if not kids:
                    return Rational(0)
            else:
                total = exact_value(Mul(tuple(consts)))
                if total == 0:
                    return Rational(0)
                if not rest:
                    return _const_expr(total)
                if total == -1:
                    return Neg(rest[0] if len(rest) == 1 else Mul(tuple(rest)))
                lead = [] if total == 1 else [_const_expr(total)]
                kids = rest[:first] + lead + rest[first:]
            if len(kids) == 1:
                return kids[0]
    if isinstance(e, Div):
        if _is_exact(kids[0]) and exact_value(kids[0]) == 0:
            return Rational(0)
        if _is_exact(kids[1]) and exact_value(kids[1]) == 1:
            return kids[0]
    return _rebuild(e, kids)


def _is_exact(e: Expr) -> bool:
    try:
        exact_value(e)
        return True
    except (NotExactError, UnboundSymbolError, ZeroDivisionError):
        return False


# -- binding -------------------------------------------------------------------

BindingValue = Union[int, Fraction, str, tuple, Expr]


def _binding_expr(name: str, value) -> Expr:
    if isinstance(value, Expr):
        e = value
    elif isinstance(value, str):
        e = parse_expression(value)
    elif isinstance(value, tuple):
        re_, im_ = (to_fraction(v) for v in value)
        return _const_expr((re_, im_))
    elif isinstance(value, float):
        raise BindingError(f"parameter {name!r}: floating-point values are not exact; use a rational")
    else:
        return Rational(to_fraction(value))
    if free_symbols(e):
        raise BindingError(f"parameter {name!r} must be a constant, got {e}")
    try:
        return _const_expr(exact_value(e))
    except NotExactError as exc:
        raise BindingError(f"parameter {name!r}: {exc}") from None


def bind_parameters(e: Expr, binding: Mapping[str, BindingValue], free=()) -> Expr:
    """Substitute exact constants for parameters.

    Parameters
    ----------
    e : Expr
    binding : mapping of symbol name to an exact rational, a ``(re, im)``
        pair, or constant expression text such as ``"2/10"`` or ``"3*I"``.
    free : names allowed to stay symbolic (eigenvalue and variable).

    Raises
    ------
    UnboundSymbolError
        if a symbol other than ``free`` has no binding.
    BindingError
        if ``binding`` tries to fix one of the ``free`` symbols.
    """
    free = set(free)
    clash = free & set(binding)
    if clash:
        raise BindingError("cannot bind the eigenvalue/variable symbol(s): " + ", ".join(sorted(clash)))
    missing = free_symbols(e) - free - set(binding)
    if missing:
        raise UnboundSymbolError(missing)
    mapping = {k: _binding_expr(k, v) for k, v in binding.items() if k in free_symbols(e)}
    return fold_constants(substitute(e, mapping))


# -- numeric evaluation ----------------------------------------------------------


def evaluate(e: Expr, env: Mapping[str, object]) -> acb:
    """Evaluate at the active FLINT precision; ``env`` maps symbols to scalars."""
    if isinstance(e, Rational):
        return to_complex(e.value)
    if isinstance(e, ImaginaryUnit):
        return acb(0, 1)
    if isinstance(e, Symbol):
        if e.name not in env:
            raise UnboundSymbolError([e.name])
        return to_complex(env[e.name])
    if isinstance(e, Neg):
        return -evaluate(e.arg, env)
    if isinstance(e, Add):
        out = acb(0)
        for a in e.args:
            out += evaluate(a, env)
        return out
    if isinstance(e, Mul):
        out = acb(1)
        for a in e.args:
            out *= evaluate(a, env)
        return out
    if isinstance(e, Div):
        return evaluate(e.num, env) / evaluate(e.den, env)
    if isinstance(e, PowInt):
        return evaluate(e.base, env) ** e.exp
    if isinstance(e, PowRat):
        b = evaluate(e.base, env)
        return (b.log() * to_complex(e.exp)).exp()
    f = evaluate(e.arg, env)
    return getattr(f, e.name)()


def lambdify(e: Expr, var: str, env: Mapping[str, object] = None):
    """Compile ``e`` to a numpy function of ``var`` (double precision)."""
    import numpy as np

    env = dict(env or {})

    def go(node):
        if isinstance(node, Rational):
            v = float(node.value)
            return lambda x: v
        if isinstance(node, ImaginaryUnit):
            return lambda x: 1j
        if isinstance(node, Symbol):
            if node.name == var:
                return lambda x: x
            if node.name not in env:
                raise UnboundSymbolError([node.name])
            v = complex(env[node.name]) if isinstance(env[node.name], complex) else float(to_fraction(env[node.name]))
            return lambda x: v
        kids = [go(k) for k in node.children()]
        if isinstance(node, Neg):
            return lambda x: -kids[0](x)
        if isinstance(node, Add):
            return lambda x: sum(k(x) for k in kids)
        if isinstance(node, Mul):
            def mul(x):
                out = 1.0
                for k in kids:
                    out = out * k(x)
                return out
            return mul
        if isinstance(node, Div):
            return lambda x: kids[0](x) / kids[1](x)
        if isinstance(node, PowInt):
            p = node.exp
            return lambda x: kids[0](x) ** float(p) if p < 0 else kids[0](x) ** p
        if isinstance(node, PowRat):
            p = float(node.exp)
            return lambda x: kids[0](x) ** p
        fn = getattr(np, node.name)
        return lambda x: fn(kids[0](x))

    f = go(e)
    return lambda x: f(np.asarray(x, dtype=float)) + 0 * np.asarray(x, dtype=float)

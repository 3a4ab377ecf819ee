"""Problem files (``*.aim``) and the built-in catalog.

A problem file is line oriented::

    # comment
    [problem]
    name = yukawa
    label = E{k}{L}

    [symbols]
    eigenvalue = En
    variable = r

    [expressions]
    lambda0 = 2*beta - 2/r
    s0 = ...

    [parameters]
    A = 4
    beta = 3

    [solver]
    x0 = 1/beta
    nmax = 201

    [oracle]
    W = L*(L+1)/r^2 - A*exp(-alpha*r)/r

Every value on the right of ``=`` uses the expression grammar, so numbers
stay exact.  Parameters are evaluated top to bottom and may refer to earlier
parameters.  Extra entries in ``[expressions]`` are macros substituted into
``lambda0`` and ``s0``.  A value of ``?`` marks an entry the user must
supply with an override.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional

from .aim import SolverParams
from .expr import (
    Expr,
    ExprSyntaxError,
    NotExactError,
    Rational,
    UnboundSymbolError,
    bind_parameters,
    exact_value,
    free_symbols,
    parse_expression,
    substitute,
)
from .numerics import PrecisionContext
from .series import SeriesError, SingularPointError, expand_series

__all__ = [
    "ProblemError",
    "OracleSpec",
    "ProblemSpec",
    "load_problem",
    "parse_problem",
    "catalog_names",
    "catalog_path",
    "resolve_problem",
]

SECTIONS = ("problem", "symbols", "expressions", "parameters", "solver", "oracle")
REQUIRED = "?"
SOLVER_KEYS = {
    "x0": "expr",
    "nmax": int,
    "nstep": int,
    "dprec": int,
    "guard": int,
    "tol": "expr",
    "filter": str,
    "digits": int,
    "print_every": int,
    "strict": bool,
}
ORACLE_KEYS = ("W", "r_min", "r_max", "h", "e_min", "e_max", "scale")


class ProblemError(ValueError):
    """Invalid problem definition; ``errors`` lists every problem found."""

    def __init__(self, errors, source="<problem>"):
        self.errors = list(errors)
        self.source = source
        super().__init__(f"{source}: " + "; ".join(self.errors))


@dataclass(frozen=True)
class OracleSpec:
    """Finite-difference check of a radial problem.

    The oracle solves ``u'' = (W(r) - eps) u`` with ``u(r_min) = u(r_max) = 0``
    and reports ``E = eps / scale``.
    """

    W: Expr
    variable: str = "r"
    r_min: Fraction = Fraction(1, 10**6)
    r_max: Fraction = Fraction(60)
    h: Fraction = Fraction(1, 2000)
    e_min: Optional[Fraction] = None
    e_max: Fraction = Fraction(0)
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("oracle grid step h must be positive")
        if self.r_max <= self.r_min:
            raise ValueError("oracle needs r_max > r_min")
        if self.r_min <= 0:
            raise ValueError("oracle needs r_min > 0")


@dataclass
class ProblemSpec:
    """A bound eigenvalue problem ready for the solver."""

    name: str
    lambda0: Expr
    s0: Expr
    eigen: str
    variable: str
    parameters: dict
    defaults: SolverParams
    lambda0_text: str = ""
    s0_text: str = ""
    description: str = ""
    label: str = "E{k}"
    label_offset: int = 0
    macros: dict = field(default_factory=dict)
    oracle: Optional[OracleSpec] = None
    source: str = "<problem>"
    raw: dict = field(default_factory=dict)

    @property
    def x0(self) -> Fraction:
        return self.defaults.x0

    def label_for(self, k: int) -> str:
        fields = {name: _label_value(v) for name, v in self.parameters.items()}
        fields.update(k=k, n=k + self.label_offset)
        try:
            return self.label.format(**fields)
        except (KeyError, IndexError, ValueError):
            return f"E{k}"


def _label_value(v):
    if isinstance(v, Fraction) and v.denominator == 1:
        return v.numerator
    return v


# -- parsing ---------------------------------------------------------------------------

_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*?)\s*$")


def _read_sections(text: str, source: str):
    data = {s: {} for s in SECTIONS}
    lines = {s: {} for s in SECTIONS}
    errors = []
    section = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in SECTIONS:
                errors.append(f"line {no}: unknown section [{section}]")
                section = None
            continue
        m = _LINE.match(line)
        if m is None:
            errors.append(f"line {no}: expected 'key = value'")
            continue
        if section is None:
            errors.append(f"line {no}: entry outside of a known section")
            continue
        key, value = m.group(1), m.group(2)
        if key in data[section]:
            errors.append(f"line {no}: duplicate key {key!r} in [{section}]")
        data[section][key] = value
        lines[section][key] = no
    return data, lines, errors


def parse_problem(text: str, source: str = "<problem>", overrides: Mapping[str, object] = None) -> ProblemSpec:
    """Build a validated :class:`ProblemSpec` from problem-file text.

    ``overrides`` replaces parameter, macro or solver values by key before
    validation.  All problems found are reported together in one
    :class:`ProblemError`.
    """
    data, lines, errors = _read_sections(text, source)
    overrides = dict(overrides or {})
    for key, value in overrides.items():
        value = _override_text(value)
        if key in data["parameters"]:
            data["parameters"][key] = value
        elif key in data["expressions"] and key not in ("lambda0", "s0"):
            data["expressions"][key] = value
        elif key in SOLVER_KEYS:
            data["solver"][key] = value
        else:
            errors.append(f"override of nonexistent key {key!r}")

    def where(section, key):
        no = lines[section].get(key)
        return f"line {no}: " if no else ""

    prob = data["problem"]
    name = prob.get("name", Path(source).stem)
    eigen = data["symbols"].get("eigenvalue", "E")
    var = data["symbols"].get("variable", "x")
    for k, v in (("eigenvalue", eigen), ("variable", var)):
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", v):
            errors.append(f"{where('symbols', k)}invalid {k} symbol {v!r}")

    # parameters, in file order
    params = {}
    param_exprs = {}
    for key, text_ in data["parameters"].items():
        if text_ == REQUIRED:
            errors.append(f"{where('parameters', key)}parameter {key!r} must be supplied (e.g. --set {key}=...)")
            continue
        if key in (eigen, var):
            errors.append(f"{where('parameters', key)}cannot bind the eigenvalue/variable symbol {key!r}")
            continue
        try:
            e = parse_expression(text_)
            unknown = free_symbols(e) - set(params)
            if unknown:
                raise UnboundSymbolError(unknown)
            v = exact_value(substitute(e, {k: _const(v) for k, v in params.items()}))
            params[key] = v
            param_exprs[key] = text_
        except (ExprSyntaxError, UnboundSymbolError, NotExactError, ZeroDivisionError) as exc:
            errors.append(f"{where('parameters', key)}parameter {key!r}: {exc}")

    # expressions and macros
    exprs = data["expressions"]
    parsed = {}
    for key in ("lambda0", "s0"):
        if key not in exprs:
            errors.append(f"[expressions] needs {key}")
    macros = {}
    for key, text_ in exprs.items():
        if text_ == REQUIRED:
            errors.append(f"{where('expressions', key)}expression {key!r} must be supplied (e.g. --set {key}=...)")
            continue
        try:
            parsed[key] = parse_expression(text_)
        except ExprSyntaxError as exc:
            errors.append(f"{where('expressions', key)}{key}: {exc}")
    for key, e in parsed.items():
        if key not in ("lambda0", "s0"):
            macros[key] = e
    bound = {}
    for key in ("lambda0", "s0"):
        if key not in parsed:
            continue
        e = _expand_macros(parsed[key], macros)
        try:
            bound[key] = bind_parameters(e, {k: _const(v) for k, v in params.items() if k in free_symbols(e)}, free=(eigen, var))
        except UnboundSymbolError as exc:
            missing = [n for n in exc.names if n not in data["parameters"] and n not in exprs]
            if missing:
                errors.append(f"{where('expressions', key)}{key}: unbound symbol(s): {', '.join(missing)}")
        except (ValueError, ZeroDivisionError) as exc:
            errors.append(f"{where('expressions', key)}{key}: {exc}")

    # solver settings
    solver = {}
    for key, text_ in data["solver"].items():
        kind = SOLVER_KEYS.get(key)
        if kind is None:
            errors.append(f"{where('solver', key)}unknown solver key {key!r}")
            continue
        if text_ == REQUIRED:
            errors.append(f"{where('solver', key)}solver setting {key!r} must be supplied")
            continue
        try:
            solver[key] = _solver_value(kind, text_, params)
        except (ValueError, ExprSyntaxError, UnboundSymbolError, NotExactError, ZeroDivisionError) as exc:
            errors.append(f"{where('solver', key)}{key}: {exc}")
    defaults = None
    try:
        defaults = SolverParams(**solver)
    except (ValueError, TypeError) as exc:
        errors.append(f"solver settings: {exc}")

    # x0 must be a regular point of both expressions
    if defaults is not None and len(bound) == 2:
        probe = PrecisionContext(30, 10)
        for key in ("lambda0", "s0"):
            try:
                expand_series(bound[key], eigen, var, defaults.x0, 1, probe)
            except SingularPointError as exc:
                errors.append(f"{key}: singular expansion point x0 = {defaults.x0} ({exc})")
            except SeriesError as exc:
                errors.append(f"{key} at x0 = {defaults.x0}: {exc}")

    oracle = None
    if data["oracle"]:
        try:
            oracle = _oracle(data["oracle"], params, var)
        except (ValueError, ExprSyntaxError, UnboundSymbolError, NotExactError) as exc:
            errors.append(f"[oracle]: {exc}")

    offset = 0
    if "label_offset" in prob:
        try:
            off = exact_value(substitute(parse_expression(prob["label_offset"]), {k: _const(v) for k, v in params.items()}))
            offset = int(off)
        except (ValueError, TypeError, ExprSyntaxError) as exc:
            errors.append(f"{where('problem', 'label_offset')}label_offset: {exc}")

    if errors:
        raise ProblemError(errors, source)
    return ProblemSpec(
        name=name,
        lambda0=bound["lambda0"],
        s0=bound["s0"],
        eigen=eigen,
        variable=var,
        parameters=params,
        defaults=defaults,
        lambda0_text=exprs["lambda0"],
        s0_text=exprs["s0"],
        description=prob.get("description", ""),
        label=prob.get("label", "E{k}"),
        label_offset=offset,
        macros={k: exprs[k] for k in macros},
        oracle=oracle,
        source=source,
        raw={"parameters": param_exprs, "solver": dict(data["solver"])},
    )


def _override_text(value) -> str:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        raise ValueError("overrides must be exact; use a rational such as 1/100")
    return str(value).strip()


def _const(v) -> Expr:
    from .expr import _const_expr

    return _const_expr(v)


def _expand_macros(e: Expr, macros: dict, depth: int = 0) -> Expr:
    if depth > 20:
        raise ValueError("macro expansion is too deep (cyclic definition?)")
    names = free_symbols(e) & set(macros)
    if not names:
        return e
    return _expand_macros(substitute(e, {k: macros[k] for k in names}), macros, depth + 1)


def _solver_value(kind, text_: str, params: dict):
    if kind == "expr":
        e = parse_expression(text_)
        v = exact_value(substitute(e, {k: _const(v) for k, v in params.items()}))
        if not isinstance(v, Fraction):
            raise ValueError("must be a real rational")
        return v
    if kind is int:
        return int(text_)
    if kind is bool:
        if text_.lower() in ("1", "true", "yes", "on"):
            return True
        if text_.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {text_!r}")
    return text_


def _oracle(section: dict, params: dict, var: str) -> OracleSpec:
    unknown = set(section) - set(ORACLE_KEYS)
    if unknown:
        raise ValueError("unknown oracle key(s): " + ", ".join(sorted(unknown)))
    if "W" not in section:
        raise ValueError("oracle needs W")
    W = bind_parameters(parse_expression(section["W"]), {k: _const(v) for k, v in params.items() if k in free_symbols(parse_expression(section["W"]))}, free=(var,))
    kw = {}
    for key in ("r_min", "r_max", "h", "e_min", "e_max", "scale"):
        if key in section:
            v = exact_value(substitute(parse_expression(section[key]), {k: _const(v) for k, v in params.items()}))
            if not isinstance(v, Fraction):
                raise ValueError(f"{key} must be real")
            kw[key] = v
    return OracleSpec(W, var, **kw)


def load_problem(path, overrides: Mapping[str, object] = None) -> ProblemSpec:
    """Read and validate a problem file."""
    path = Path(path)
    return parse_problem(path.read_text(encoding="utf-8"), str(path), overrides)


# -- catalog ---------------------------------------------------------------------------------


def catalog_names() -> list:
    base = resources.files("aimkit") / "catalog"
    return sorted(p.name[:-4] for p in base.iterdir() if p.name.endswith(".aim"))


def catalog_path(name: str):
    base = resources.files("aimkit") / "catalog"
    p = base / f"{name}.aim"
    if not p.is_file():
        raise KeyError(f"unknown catalog problem {name!r}; available: {', '.join(catalog_names())}")
    return p


def resolve_problem(name_or_path, overrides: Mapping[str, object] = None) -> ProblemSpec:
    """Load a catalog entry by name, or a problem file by path."""
    p = Path(str(name_or_path))
    if p.suffix == ".aim" or p.exists():
        return load_problem(p, overrides)
    src = catalog_path(str(name_or_path))
    return parse_problem(src.read_text(encoding="utf-8"), f"{name_or_path}.aim", overrides)

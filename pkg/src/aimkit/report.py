"""Solve a problem and render the outcome as a table, CSV or JSON."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Mapping, Optional

from flint import acb

from .aim import RunResult, SolverParams, run
from .numerics import format_fixed, format_sci
from .problem import ProblemSpec, resolve_problem

__all__ = ["Report", "solve", "run_catalog", "render", "FORMATS"]

FORMATS = ("table", "csv", "json")


@dataclass(frozen=True)
class Report:
    """Outcome of one solve: the trace plus everything needed to print it."""

    problem: ProblemSpec
    params: SolverParams
    result: RunResult
    overrides: dict = field(default_factory=dict)

    @property
    def trace(self):
        return self.result.trace

    @property
    def wall_time_s(self) -> float:
        return self.result.wall_time_s

    @property
    def converged(self) -> list:
        return self.result.trace.converged

    def label(self, k: int) -> str:
        return self.problem.label_for(k)

    def eigenvalues(self) -> list:
        """Converged eigenvalues as ``(label, value, n)`` with ``value`` an acb."""
        return [(self.label(c.index), c.value, c.n) for c in self.converged]


def solve(problem: ProblemSpec, params: Optional[SolverParams] = None, progress=None) -> Report:
    """Run the solver on an already loaded problem."""
    params = params or problem.defaults
    return Report(problem, params, run(problem, params, progress=progress))


def run_catalog(name: str, overrides: Mapping[str, object] = None, progress=None) -> Report:
    """Load a catalog entry (or problem file) with overrides and solve it.

    ``overrides`` may name parameters, macros or solver settings, e.g.
    ``{"A": 8, "L": 1, "nmax": 101}``.
    """
    problem = resolve_problem(name, overrides)
    report = solve(problem, problem.defaults, progress=progress)
    return Report(report.problem, report.params, report.result, dict(overrides or {}))


# -- rendering ---------------------------------------------------------------------------


def _is_real(z: acb, params: SolverParams) -> bool:
    return params.filter in ("-r", "+r", "r")


def _cell(z: acb, params: SolverParams) -> str:
    d = params.digits
    w = d + 5
    if _is_real(z, params):
        return format_fixed(z.real, d, w)
    im = format_fixed(z.imag, d)
    sign = "-" if im.startswith("-") else "+"
    return f"{format_fixed(z.real, d, w)} {sign} {im.lstrip('-')}i"


def _full(x, nd: int) -> str:
    return format_sci(x, nd)


def render_table(report: Report) -> str:
    params = report.params
    rows = report.trace.checkpoints
    k = params.print_every
    shown = [r for i, r in enumerate(rows) if i % k == 0 or i == len(rows) - 1]
    ncol = max((len(v) for _, v in shown), default=0)
    sample = next((z for _, v in shown for z in v), acb(0))
    width = len(_cell(sample, params))
    head = "iteration" + "".join(" " + report.label(j).center(width) for j in range(ncol))
    lines = [head.rstrip()]
    for n, vals in shown:
        lines.append(f"   {n:03d}" + "".join(" " + _cell(z, params) for z in vals))
    lines.append("")
    eig = report.eigenvalues()
    if eig:
        lines.append(f"converged eigenvalues (tol {_tol_text(params)}, {'radius' if params.strict else 'distance'} test):")
        for label, z, n in eig:
            lines.append(f"  {label:>6s} = {_cell(z, params).strip()}   (converged at iteration {n:03d})")
    else:
        lines.append("no converged eigenvalues")
    lines.append(f"wall time: {report.wall_time_s:.2f} s")
    return "\n".join(lines) + "\n"


def _tol_text(params: SolverParams) -> str:
    t = params.tol
    if t.numerator == 1 and str(t.denominator).strip("0") == "1":
        return f"1e-{len(str(t.denominator)) - 1}"
    return str(t)


def _digits_for(params: SolverParams) -> int:
    return max(params.dprec - params.guard, params.digits)


def render_csv(report: Report) -> str:
    nd = _digits_for(report.params)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["iteration", "index", "label", "re", "im", "converged"])
    conv = {c.index for c in report.converged}
    last = report.trace.checkpoints[-1][0] if report.trace.checkpoints else None
    for n, vals in report.trace.checkpoints:
        for j, z in enumerate(vals):
            flag = "yes" if n == last and j in conv else ""
            w.writerow([n, j, report.label(j), _full(z.real, nd), _full(z.imag, nd), flag])
    return buf.getvalue()


def to_dict(report: Report) -> dict:
    params = report.params
    nd = _digits_for(params)
    return {
        "problem": report.problem.name,
        "params": {
            "nmax": params.nmax,
            "nstep": params.nstep,
            "dprec": params.dprec,
            "guard": params.guard,
            "tol": str(params.tol),
            "x0": str(params.x0),
            "filter": params.filter,
            "digits": params.digits,
            "strict": params.strict,
            "parameters": {k: str(v) for k, v in report.problem.parameters.items()},
        },
        "checkpoints": [
            {"n": n, "roots": [{"re": _full(z.real, nd), "im": _full(z.imag, nd)} for z in vals]}
            for n, vals in report.trace.checkpoints
        ],
        "converged": [
            {"index": c.index, "label": report.label(c.index), "n": c.n, "re": _full(c.value.real, nd), "im": _full(c.value.imag, nd)}
            for c in report.converged
        ],
        "wall_time_s": round(report.wall_time_s, 6),
    }


def render_json(report: Report) -> str:
    return json.dumps(to_dict(report), indent=2) + "\n"


def render(report: Report, format: str = "table") -> str:
    """Text form of ``report``; ``format`` is one of ``table``, ``csv``, ``json``.

    The table mirrors the classic iteration listing: a zero-padded iteration
    column and one fixed-width column per eigenvalue with ``digits`` fraction
    digits.  CSV and JSON carry decimal strings at the working precision so
    nothing passes through binary floating point.
    """
    if format == "table":
        return render_table(report)
    if format == "csv":
        return render_csv(report)
    if format == "json":
        return render_json(report)
    raise ValueError(f"unknown format {format!r}; choose one of {', '.join(FORMATS)}")

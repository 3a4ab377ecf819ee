"""Command-line front end.

::

    aimkit run yukawa --set A=8 --set L=1 --nmax 101 --digits 15
    aimkit run my_problem.aim --format json
    aimkit list
    aimkit show ecsc --set delta=2/100
    aimkit oracle yukawa --count 3

Exit status: 0 when at least one eigenvalue converged, 2 when the run
finished without a converged eigenvalue, 1 on any error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from fractions import Fraction

from . import __version__
from .numerics import format_fixed
from .problem import ProblemError, catalog_names, resolve_problem
from .report import FORMATS, render, solve
from .roots import FILTERS

EXIT_OK, EXIT_ERROR, EXIT_NOT_CONVERGED = 0, 1, 2

log = logging.getLogger("aimkit")


def _key_value(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key, value = text.split("=", 1)
    key = key.strip()
    if not key:
        raise argparse.ArgumentTypeError(f"empty key in {text!r}")
    return key, value.strip()


def _exact(text: str):
    """Decimal or scientific literals become exact rationals; other text is left to the expression grammar."""
    try:
        return Fraction(text.strip())
    except ValueError:
        return text


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aimkit", description="Eigenvalues of y'' = lambda0 y' + s0 y by the improved asymptotic iteration method.")
    ap.add_argument("--version", action="version", version=f"aimkit {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0, help="progress on stderr (-vv for debug logging)")
    sub = ap.add_subparsers(dest="command", required=True)

    def problem_args(p):
        p.add_argument("problem", help="catalog name or path to a .aim problem file")
        p.add_argument("--set", dest="sets", action="append", type=_key_value, default=[], metavar="KEY=VALUE", help="override a parameter, macro or solver setting (repeatable)")

    run = sub.add_parser("run", help="solve a problem and print the iteration table")
    problem_args(run)
    run.add_argument("--nmax", type=int, help="last iteration level")
    run.add_argument("--nstep", type=int, help="checkpoint stride")
    run.add_argument("--dprec", type=int, help="working precision in decimal digits")
    run.add_argument("--tol", type=_exact, help="convergence tolerance, e.g. 1e-20 or 10^(-20)")
    run.add_argument("--x0", type=_exact, help="expansion point (exact rational)")
    run.add_argument("--filter", choices=FILTERS, help="root filter")
    run.add_argument("--digits", type=int, help="fraction digits in the table")
    run.add_argument("--print-every", type=int, dest="print_every", help="show every k-th checkpoint")
    run.add_argument("--format", choices=FORMATS, default="table")
    run.add_argument("--strict-tol", action="store_true", help="converge on the root radius instead of checkpoint distance")

    sub.add_parser("list", help="list the built-in problems")

    show = sub.add_parser("show", help="print lambda0, s0 and the bound parameters of a problem")
    problem_args(show)

    orc = sub.add_parser("oracle", help="independent Numerov eigenvalues for a problem with an [oracle] section")
    problem_args(orc)
    orc.add_argument("--count", type=int, default=1, help="number of lowest eigenvalues")
    return ap


def _overrides(args) -> dict:
    ov = dict(args.sets)
    for key in ("nmax", "nstep", "dprec", "tol", "x0", "filter", "digits", "print_every"):
        v = getattr(args, key, None)
        if v is not None:
            ov[key] = v
    if getattr(args, "strict_tol", False):
        ov["strict"] = "true"
    return ov


def _apply_threads():
    n = os.environ.get("AIMKIT_THREADS")
    if not n:
        return
    try:
        threads = max(1, int(n))
    except ValueError:
        log.warning("ignoring AIMKIT_THREADS=%r (not an integer)", n)
        return
    import flint

    flint.ctx.threads = threads


def cmd_run(args) -> int:
    problem = resolve_problem(args.problem, _overrides(args))
    progress = None
    if args.verbose:
        def progress(n, rs):
            print(f"  checkpoint {n:03d}: degree {rs.degree}, {len(rs.roots)} roots", file=sys.stderr, flush=True)
    report = solve(problem, problem.defaults, progress=progress)
    sys.stdout.write(render(report, args.format))
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def cmd_list(args) -> int:
    for name in catalog_names():
        try:
            desc = resolve_problem(name).description
        except ProblemError as exc:
            desc = f"(needs: {len(exc.errors)} required entries) "
            desc += _raw_description(name)
        print(f"{name:10s} {desc}")
    return EXIT_OK


def _raw_description(name: str) -> str:
    from .problem import catalog_path

    for line in catalog_path(name).read_text(encoding="utf-8").splitlines():
        if line.strip().startswith("description"):
            return line.split("=", 1)[1].strip()
    return ""


def cmd_show(args) -> int:
    p = resolve_problem(args.problem, dict(args.sets))
    d = p.defaults
    print(f"problem     {p.name}  ({p.source})")
    if p.description:
        print(f"            {p.description}")
    print(f"eigenvalue  {p.eigen}")
    print(f"variable    {p.variable}")
    print("parameters")
    for k, v in p.parameters.items():
        print(f"  {k:8s} = {v}")
    for k, text in p.macros.items():
        print(f"  {k:8s} := {text}")
    print(f"lambda0     {p.lambda0_text}")
    print(f"            = {p.lambda0}")
    print(f"s0          {p.s0_text}")
    print(f"            = {p.s0}")
    print(f"solver      x0={d.x0} nmax={d.nmax} nstep={d.nstep} dprec={d.dprec} tol={d.tol} filter={d.filter} digits={d.digits}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    from .oracle import numerov_oracle

    p = resolve_problem(args.problem, dict(args.sets))
    if p.oracle is None:
        raise ProblemError([f"problem {p.name!r} has no [oracle] section"], p.source)
    vals = numerov_oracle(p.oracle, args.count)
    for k, e in enumerate(vals):
        print(f"{p.label_for(k):>6s}  {format_fixed(Fraction(e), 10, 18)}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "list": cmd_list, "show": cmd_show, "oracle": cmd_oracle}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    _apply_threads()
    try:
        return COMMANDS[args.command](args)
    except ProblemError as exc:
        print(f"error: {exc.source}:", file=sys.stderr)
        for e in exc.errors:
            print(f"  {e}", file=sys.stderr)
        return EXIT_ERROR
    except (KeyError, ValueError, OSError, RuntimeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

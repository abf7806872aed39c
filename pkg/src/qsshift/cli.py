"""Command line front end: ``qsshift <command> [options]``.

Commands
--------
solve       shifted solves for a matrix/vector stored as JSON
sylvester   ``A X + X L = Y`` with ``L`` lower triangular (CSV input)
bvp         series errors for the boundary value problem (CSV table)
sqrt        square-root rational approximation errors (CSV table)
poisson     Poisson equation via the Sylvester solver vs the Kronecker oracle
bench-n     fast vs sequential timings against the number of blocks
bench-m     fast-solver timings against the block size

Exit status is 0 on success, 1 on usage or input errors, 2 on numerical
failure (for example a singular shifted matrix).
"""

from __future__ import annotations

import argparse
import json
import re
import sys

import numpy as np

from . import experiments as ex
from .core import matvec
from .io import (blockvector_to_list, load_blockvector, load_qsmatrix, parse_complex, read_csv_matrix,
                 write_csv_matrix)
from .shift_solver import SingularShift, solve_many
from .sylvester import solve_diag, solve_lower_triangular

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


_PI = re.compile(r"^\s*([-+]?\d*\.?\d*(?:e[-+]?\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$", re.I)


def parse_real(token: str) -> float:
    """A float or a multiple of pi such as ``pi/2``, ``2pi``, ``-0.5*pi/3``."""
    token = token.strip()
    mt = _PI.match(token)
    if mt:
        coef = mt.group(1)
        c = 1.0 if coef in ("", "+") else (-1.0 if coef == "-" else float(coef))
        d = float(mt.group(2)) if mt.group(2) else 1.0
        return c * np.pi / d
    try:
        return float(token)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a real number: {token!r}") from None


def _list(conv):
    def parse(text):
        items = [s for s in text.split(",") if s.strip()]
        if not items:
            raise argparse.ArgumentTypeError("empty list")
        try:
            return [conv(s) for s in items]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return parse


def _int(s):
    return int(s.strip())


def _emit(rep: ex.ExperimentReport, args):
    text = rep.to_csv(args.out)
    if args.out is None:
        sys.stdout.write(text)
    if args.json:
        rep.to_json(args.json)
    summary = {k: v for k, v in rep.meta.items() if k not in ("python", "numpy", "precision")}
    print(f"# {rep.experiment}: {json.dumps(summary, default=float)}", file=sys.stderr)


def cmd_solve(args):
    A = load_qsmatrix(args.matrix)
    y = load_blockvector(args.rhs, A.sizes)
    xs = solve_many(A, args.shifts, y)
    res = [float(np.linalg.norm(matvec(A, x) + s * x - y) / max(np.linalg.norm(y), np.finfo(float).tiny))
           for s, x in zip(args.shifts, xs)]
    doc = {"shifts": [[s.real, s.imag] for s in args.shifts],
           "solutions": [blockvector_to_list(x, A.sizes) for x in xs],
           "residuals": res}
    text = json.dumps(doc)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text)
    print(f"# solve: {len(xs)} shifts, max relative residual {max(res):.3e}", file=sys.stderr)


def cmd_sylvester(args):
    A = load_qsmatrix(args.matrix)
    L = read_csv_matrix(args.L)
    Y = read_csv_matrix(args.Y)
    if args.diag:
        if L.ndim == 2 and min(L.shape) == 1:
            d = L.ravel()
        else:
            d = np.diagonal(L)
        X = solve_diag(A, d, Y)
        Lmat = np.diag(d)
    else:
        X = solve_lower_triangular(A, L, Y)
        Lmat = L
    res = np.linalg.norm(matvec(A, X) + X @ Lmat - Y) / max(np.linalg.norm(Y), np.finfo(float).tiny)
    text = write_csv_matrix(X, args.out)
    if args.out is None:
        sys.stdout.write(text)
    print(f"# sylvester: relative residual {res:.3e}", file=sys.stderr)


def cmd_bvp(args):
    _emit(ex.run_bvp(args.n, args.t, args.lmin, args.lmax, args.points, args.variant, args.seed,
                     args.fit_from), args)


def cmd_sqrt(args):
    _emit(ex.run_sqrt(args.n, args.c, args.method, args.lvalues, args.seed), args)


def cmd_poisson(args):
    if len(args.na) != len(args.nb):
        raise UsageError("--na and --nb need the same number of entries")
    _emit(ex.run_poisson(list(zip(args.na, args.nb)), args.cap), args)


def cmd_bench_n(args):
    _emit(ex.bench_n(args.sizes, args.r, args.shifts, args.trials, args.m, args.seed), args)


def cmd_bench_m(args):
    _emit(ex.bench_m(args.blocks, args.N, args.ell, args.r, args.trials, args.seed), args)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qsshift", description="Shifted quasiseparable solvers and experiments.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def table_opts(sp):
        sp.add_argument("--out", help="CSV output file (default: stdout)")
        sp.add_argument("--json", help="also write the full report as JSON")

    sp = sub.add_parser("solve", help="solve (A + sigma_i I) x_i = y")
    sp.add_argument("--matrix", required=True, help="quasiseparable matrix (JSON)")
    sp.add_argument("--shifts", required=True, type=_list(parse_complex), help="comma-separated, e.g. 1,2+1j")
    sp.add_argument("--rhs", required=True, help="block vector (JSON)")
    sp.add_argument("--out", help="output JSON (default: stdout)")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("sylvester", help="solve A X + X L = Y, L lower triangular")
    sp.add_argument("--matrix", required=True, help="quasiseparable matrix A (JSON)")
    sp.add_argument("--L", required=True, help="L as CSV (re+imj tokens)")
    sp.add_argument("--Y", required=True, help="right-hand side as CSV")
    sp.add_argument("--diag", action="store_true", help="use only the diagonal of L (or a single row/column)")
    sp.add_argument("--out", help="output CSV for X (default: stdout)")
    sp.set_defaults(func=cmd_sylvester)

    sp = sub.add_parser("bvp", help="truncated series errors for q_t(A) g")
    sp.add_argument("--n", type=int, default=100)
    sp.add_argument("--t", type=_list(parse_real), default=[np.pi / 2], help="e.g. pi/2,pi/12")
    sp.add_argument("--lmin", type=int, default=10)
    sp.add_argument("--lmax", type=int, default=500)
    sp.add_argument("--points", type=int, default=25)
    sp.add_argument("--variant", choices=["plain", "accel", "both"], default="both")
    sp.add_argument("--fit-from", type=int, default=50, dest="fit_from")
    sp.add_argument("--seed", type=int, default=0)
    table_opts(sp)
    sp.set_defaults(func=cmd_bvp)

    sp = sub.add_parser("sqrt", help="square-root rational approximation errors")
    sp.add_argument("--n", type=int, default=20, help="grid size (matrix order n^2)")
    sp.add_argument("--c", type=float, default=10.0)
    sp.add_argument("--method", type=int, choices=[2, 3], default=3)
    sp.add_argument("--lvalues", type=_list(_int), default=[6, 8, 10, 12, 14, 16, 18, 20])
    sp.add_argument("--seed", type=int, default=0)
    table_opts(sp)
    sp.set_defaults(func=cmd_sqrt)

    sp = sub.add_parser("poisson", help="Poisson equation vs Kronecker oracle")
    sp.add_argument("--na", type=_list(_int), default=[10])
    sp.add_argument("--nb", type=_list(_int), default=[50])
    sp.add_argument("--cap", type=int, default=50 * 200, help="largest na*nb for the oracle")
    table_opts(sp)
    sp.set_defaults(func=cmd_poisson)

    sp = sub.add_parser("bench-n", help="timings against the number of blocks")
    sp.add_argument("--sizes", type=_list(_int), default=list(range(100, 1001, 100)))
    sp.add_argument("--r", type=int, default=3)
    sp.add_argument("--shifts", type=int, default=50)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--trials", type=int, default=5)
    sp.add_argument("--seed", type=int, default=0)
    table_opts(sp)
    sp.set_defaults(func=cmd_bench_n)

    sp = sub.add_parser("bench-m", help="timings against the block size")
    sp.add_argument("--blocks", type=_list(_int), default=[200, 400, 800, 1600])
    sp.add_argument("--N", type=int, default=2)
    sp.add_argument("--ell", type=int, default=2)
    sp.add_argument("--r", type=int, default=1)
    sp.add_argument("--trials", type=int, default=5)
    sp.add_argument("--seed", type=int, default=0)
    table_opts(sp)
    sp.set_defaults(func=cmd_bench_m)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except SingularShift as exc:
        print(f"qsshift: numerical failure: {exc}", file=sys.stderr)
        return 2
    except np.linalg.LinAlgError as exc:
        print(f"qsshift: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (UsageError, ValueError, OSError) as exc:
        print(f"qsshift: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

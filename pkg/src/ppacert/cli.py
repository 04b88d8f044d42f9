"""Command-line front end.

    ppacert bound N
    ppacert certify N
    ppacert rate-table N_MAX [-o FILE] [--jobs J]
    ppacert example N [--scale S] [-o FILE]
    ppacert sdp-export N -o FILE
    ppacert simulate (--rotation | --matrix "a,b;c,d") --N N [--w0 "x,y"] [--lambda L]

Exit status is 0 on success, 1 on a failed verification or I/O error and 2 on
bad usage.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import IO, Sequence

import numpy as np

from . import ppa_core
from .dual_certificate import CertificateError, certified_upper_bound
from .pep_builder import build_instance, export_sdpa
from .rational_linalg import format_decimal
from .worst_case import CertificationError, certify_optimal_rate, emit_points


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected N >= 1, got {value}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {value}")
    return value


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad vector {text!r}; use comma-separated numbers") from None


def _matrix(text: str) -> np.ndarray:
    try:
        rows = [[float(x) for x in row.split(",")] for row in text.split(";")]
        return np.array(rows)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad matrix {text!r}; use rows 'a,b;c,d'") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppacert",
        description="Exact worst-case rate of the proximal point algorithm.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="print the certified bound N^N/(N+1)^(N+1)")
    p.add_argument("n", type=_positive_int, metavar="N")

    p = sub.add_parser("certify", help="verify the primal/dual pair for N")
    p.add_argument("n", type=_positive_int, metavar="N")

    p = sub.add_parser("rate-table", help="CSV comparing the tight rate with 1/(N+1)")
    p.add_argument("n_max", type=_positive_int, metavar="N_MAX")
    p.add_argument("-o", "--output", help="write to FILE instead of stdout")
    p.add_argument("--jobs", type=_positive_int, default=1, help="certify this many N at once")

    p = sub.add_parser("example", help="CSV of the worst-case iterates k,x,y")
    p.add_argument("n", type=_positive_int, metavar="N")
    p.add_argument("--scale", type=_positive_float, default=1.0)
    p.add_argument("-o", "--output")

    p = sub.add_parser("sdp-export", help="write the SDP in sparse SDPA format")
    p.add_argument("n", type=_positive_int, metavar="N")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("simulate", help="run the proximal point method numerically")
    kind = p.add_mutually_exclusive_group(required=True)
    kind.add_argument("--rotation", action="store_true", help="worst-case planar rotation for N")
    kind.add_argument("--matrix", type=_matrix, help='linear monotone operator, rows as "a,b;c,d"')
    p.add_argument("--N", dest="n", type=_positive_int, required=True)
    p.add_argument("--w0", type=_vector, help="initial point (default e_1)")
    p.add_argument("--lambda", dest="lam", type=_positive_float, default=1.0)
    return parser


@contextlib.contextmanager
def _sink(path: str | None, default: IO[str]):
    if path is None:
        yield default
    else:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            yield fh


def _rate_rows(n_max: int, jobs: int) -> list[str]:
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        bounds = list(pool.map(certified_upper_bound, range(1, n_max + 1)))
    rows = ["N,zeta,known_bound,ratio"]
    for n, z in enumerate(bounds, start=1):
        known = Fraction(1, n + 1)
        rows.append(f"{n},{format_decimal(z)},{format_decimal(known)},{format_decimal(z * (n + 1))}")
    return rows


def _simulate(args: argparse.Namespace, out: IO[str]) -> int:
    if args.rotation:
        op = ppa_core.rotation_for(args.n)
    else:
        try:
            op = ppa_core.LinearMonotone(args.matrix)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    w0 = args.w0 if args.w0 is not None else np.eye(op.dim)[0]
    if w0.shape != (op.dim,):
        print(f"error: w0 has {w0.size} entries, operator acts on dimension {op.dim}", file=sys.stderr)
        return 2
    traj = ppa_core.ppa_run(op, w0, args.lam, args.n + 1)
    out.write("k,residual_norm\n")
    for k, r in enumerate(traj.residual_norms):
        out.write(f"{k},{r:.17g}\n")
    # every operator here is linear, so the origin is a zero
    ratio = ppa_core.performance_ratio(traj, np.zeros(op.dim))
    out.write(f"performance_ratio,{ratio:.17g}\n")
    return 0


def run(args: argparse.Namespace, out: IO[str] | None = None) -> int:
    """Execute a parsed command; returns the exit status."""
    out = sys.stdout if out is None else out
    try:
        if args.command == "bound":
            z = certified_upper_bound(args.n)
            out.write(f"{z} = {format_decimal(z)}\n")
        elif args.command == "certify":
            try:
                res = certify_optimal_rate(args.n)
            except CertificationError as exc:
                out.write(f"FAIL N={args.n} stage={exc.stage}: {exc}\n")
                return 1
            out.write(f"PASS N={args.n} eta={res.zeta} = {format_decimal(res.zeta)}\n")
        elif args.command == "rate-table":
            rows = _rate_rows(args.n_max, args.jobs)
            with _sink(args.output, out) as fh:
                fh.write("\n".join(rows) + "\n")
        elif args.command == "example":
            with _sink(args.output, out) as fh:
                fh.write("k,x,y\n")
                for k, (x, y) in enumerate(emit_points(args.n, args.scale)):
                    fh.write(f"{k},{x:.17g},{y:.17g}\n")
        elif args.command == "sdp-export":
            export_sdpa(build_instance(args.n), args.output)
        elif args.command == "simulate":
            return _simulate(args, out)
    except CertificateError as exc:
        print(f"FAIL: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())

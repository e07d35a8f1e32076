"""Command-line entry point: ``lcsym <mode> [options]``.

Exit codes: 0 when every requested solve converged, 2 when some did not,
1 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .kernel import KernelCoeffs
from .runs import (
    MODES,
    UsageError,
    cmd_cmin_map,
    cmd_coeffs,
    cmd_repro_commutator,
    cmd_solve,
    cmd_sweep,
    cmd_verify_invariance,
    emit,
    format_value,
    load_config,
    parse_floats,
    parse_geometry,
    parse_grid,
    to_csv,
    to_json,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _coeffs(text: str) -> KernelCoeffs:
    vals = parse_floats(text)
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("--coeffs needs four numbers c1,c2,c3,c4")
    return KernelCoeffs(*vals)


def _wrap(fn):
    def conv(text):
        try:
            return fn(text)
        except (UsageError, ValueError) as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
    conv.__name__ = fn.__name__
    return conv


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="lcsym",
        description="Homogeneous liquid-crystal phases of quadratic Onsager-type kernels on SO(3).",
    )
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", metavar="PATH", help="INI-style run configuration")
    parser.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--seed", type=int)
    parser.add_argument("--grid", type=_wrap(parse_grid), metavar="NA,NB,NG")
    parser.add_argument("--damping", type=float, metavar="X")
    parser.add_argument("--tol", type=float, metavar="X")
    parser.add_argument("--max-iter", type=int, metavar="N")
    parser.add_argument("--starts", type=int, metavar="N")
    parser.add_argument("--workers", type=int, metavar="N")
    parser.add_argument("--coeffs", type=_wrap(_coeffs), metavar="C1,C2,C3,C4")
    parser.add_argument(
        "--geometry", type=_wrap(parse_geometry), metavar="KIND:K=V,...",
        help="e.g. spherocuboid:W=1,B=2,L=5,D=0.5,c=0.1",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    overrides = {
        "grid": args.grid, "damping": args.damping, "tol": args.tol, "max_iter": args.max_iter,
        "starts": args.starts, "seed": args.seed, "workers": args.workers, "format": args.format,
        "coeffs": args.coeffs, "geometry": args.geometry,
    }
    try:
        cfg = load_config(args.config, args.mode, overrides)
        summary = None
        if cfg.mode == "solve":
            records, status = cmd_solve(cfg)
        elif cfg.mode == "sweep":
            records, status = cmd_sweep(cfg)
        elif cfg.mode == "coeffs":
            records, status = cmd_coeffs(cfg)
        elif cfg.mode == "cmin-map":
            records, status = cmd_cmin_map(cfg)
        elif cfg.mode == "verify-invariance":
            records, status = cmd_verify_invariance(cfg)
        else:
            records, status, summary = cmd_repro_commutator(cfg)
    except UsageError as exc:
        print(f"lcsym: error: {exc}", file=sys.stderr)
        return 1

    text = to_csv(records) if cfg.fmt == "csv" else to_json(cfg.to_dict(), records)
    emit(text, args.out)
    if summary is not None:
        stream = sys.stdout if args.out else sys.stderr
        for key, val in summary.items():
            print(f"{key}: {format_value(val)}", file=stream)
        if summary["unconverged_points"]:
            logging.warning("%d points had unconverged starts and were excluded", summary["unconverged_points"])
    if cfg.mode == "verify-invariance":
        _print_matrix(records, sys.stdout if args.out else sys.stderr)
    return status


def _print_matrix(records, stream) -> None:
    for rec in records:
        mark = "pass" if rec["passed"] else "FAIL"
        print(f"{rec['group']:8s} {mark}  max_violation={rec['max_violation']:.3e}", file=stream)


if __name__ == "__main__":
    sys.exit(main())

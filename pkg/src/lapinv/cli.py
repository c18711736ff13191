"""Command line interface: ``lapinv invert`` and ``lapinv benchmark``.

Exit codes: 0 when the discrepancy stop was reached, 2 when the run ended
on ``max-iter`` or ``a-underflow`` (outputs are still written), 1 on bad
input.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .benchmarks import (EXAMPLES, default_config, get_example,
                         perturb_source, run_benchmark, run_example13)
from .inversion import StopReason, run_inversion
from .io import (TransformFileError, fmt, load_transform, write_keyvalue,
                 write_report, write_samples, write_terms)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_GUARD = 2

TERMS_FILE = "terms.csv"
SAMPLES_FILE = "samples.csv"
REPORT_FILE = "report.txt"
MANIFEST_FILE = "manifest.txt"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 by default, which is reserved for guard stops
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}")


def _eval_grid(text: str) -> np.ndarray:
    try:
        start, step, count = text.split(":")
        start, step, n = float(start), float(step), int(count)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected start:step:count, got {text!r}")
    if n < 0 or start < 0 or (n > 1 and start + step * (n - 1) < 0):
        raise argparse.ArgumentTypeError("eval grid must be non-negative")
    return start + step * np.arange(n)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lapinv",
                     description="Laplace transform inversion from real-axis data")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    inv = sub.add_parser("invert", help="invert one data set or example")
    src = inv.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", type=Path, help='CSV file with header "p,F"')
    src.add_argument("--example", type=int, help="benchmark example id 1..13")
    inv.add_argument("--delta", type=float, required=True, help="noise level")
    inv.add_argument("--support", type=float, default=10.0,
                     help="support bound b of f (default 10)")
    inv.add_argument("--d", type=float, default=None,
                     help="right end of the data interval (default 5, or the "
                          "last p of --data)")
    inv.add_argument("--a0", type=float, default=0.1)
    inv.add_argument("--q", type=float, default=None)
    inv.add_argument("--kappa", type=float, default=None)
    inv.add_argument("--C", type=float, default=None)
    inv.add_argument("--epsilon", type=float, default=0.99)
    inv.add_argument("--max-iter", type=int, default=50)
    inv.add_argument("--seed", type=int, default=0,
                     help="noise seed for --example runs")
    inv.add_argument("--out", type=Path, default=Path("lapinv-run"))
    inv.add_argument("--eval-grid", default="0.01:0.1:100",
                     help="start:step:count of the sample grid")

    bench = sub.add_parser("benchmark", help="reproduce the benchmark tables")
    which = bench.add_mutually_exclusive_group(required=True)
    which.add_argument("--all", action="store_true")
    which.add_argument("--example", type=int)
    bench.add_argument("--deltas", type=_float_list, default="1e-2,1e-4,1e-6")
    bench.add_argument("--seeds", type=_int_list, default="1,2,3,4,5")
    bench.add_argument("--b-values", type=_float_list, default="5,8,20,30")
    bench.add_argument("--out", type=Path, default=Path("lapinv-tables"))
    return parser


def cli_invert(args: argparse.Namespace) -> int:
    if args.data is not None:
        try:
            source = load_transform(args.data, delta=args.delta)
        except TransformFileError as exc:
            raise UsageError(str(exc)) from None
        d = source.d if args.d is None else args.d
        if d > source.d:
            raise UsageError(
                f"--d {d} exceeds the last data point p={source.d}")
        if d < source.d:
            source = _Restricted(source, d)
        origin = {"input": str(args.data)}
    else:
        if args.example not in EXAMPLES:
            raise UsageError(f"unknown example {args.example}; expected 1..13")
        d = 5.0 if args.d is None else args.d
        source = perturb_source(get_example(args.example), args.delta,
                                args.seed, d=d)
        origin = {"example": args.example, "seed": args.seed}

    try:
        config = default_config(args.delta, d=d, b=args.support, a0=args.a0,
                                q=args.q, kappa=args.kappa, C=args.C,
                                epsilon=args.epsilon, max_iter=args.max_iter)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    try:
        ts = _eval_grid(args.eval_grid)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(str(exc)) from None

    recon, report = run_inversion(source, config)

    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    write_terms(out / TERMS_FILE, recon)
    write_samples(out / SAMPLES_FILE, ts, recon(ts) if ts.size else [])
    write_report(out / REPORT_FILE, report)
    manifest = {"tool": "lapinv", "version": __version__, "command": "invert",
                **origin}
    manifest.update({
        "delta": config.delta, "d": config.d, "b": config.b,
        "a0": config.a0, "q": config.q, "kappa": config.kappa,
        "C": config.C, "epsilon": config.epsilon,
        "max_iter": config.max_iter, "m_cap": config.m_cap,
        "eval_grid": args.eval_grid,
        "terms_file": TERMS_FILE, "samples_file": SAMPLES_FILE,
        "report_file": REPORT_FILE,
    })
    write_keyvalue(out / MANIFEST_FILE, manifest)

    print(f"stop_reason={report.stop_reason} n_delta={report.n_delta} "
          f"m_final={report.m_final} a_final={report.a_final:.3g} -> {out}")
    if report.stop_reason is StopReason.THRESHOLD_MET:
        return EXIT_OK
    return EXIT_GUARD


class _Restricted:
    """A data source cut down to ``[0, d]``."""

    def __init__(self, source, d: float):
        self._source = source
        self.delta = source.delta
        self.d = d

    def value(self, p: float) -> float:
        if p > self.d:
            raise ValueError(f"p={p!r} outside [0, {self.d!r}]")
        return self._source.value(p)


BENCH_HEADER = ["delta", "seed", "mae", "m_final", "iterations",
                "cpu_time_s", "a_final", "stop_reason"]
BENCH13_HEADER = ["b", "mae", "m_final", "iterations", "cpu_time_s",
                  "a_final", "stop_reason"]


def _write_rows(path: Path, header, rows) -> None:
    with path.open("w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) if not isinstance(x, str) else x
                              for x in row) + "\n")


def cli_benchmark(args: argparse.Namespace) -> int:
    if args.all:
        ids = sorted(EXAMPLES)
    elif args.example in EXAMPLES:
        ids = [args.example]
    else:
        raise UsageError(f"unknown example {args.example}; expected 1..13")
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    for ex_id in ids:
        if ex_id == 13:
            rows = [run_example13(b) for b in args.b_values]
            _write_rows(out / "table_13.csv", BENCH13_HEADER, [
                (r.b, r.mae, r.m_final, r.iterations, r.cpu_time, r.a_final,
                 r.stop_reason) for r in rows])
        else:
            rows = [run_benchmark(ex_id, delta, seed)
                    for delta in args.deltas for seed in args.seeds]
            _write_rows(out / f"table_{ex_id:02d}.csv", BENCH_HEADER, [
                (r.delta, r.seed, r.mae, r.m_final, r.iterations, r.cpu_time,
                 r.a_final, r.stop_reason) for r in rows])
        for r in rows:
            label = f"b={r.b:g}" if ex_id == 13 else \
                f"delta={r.delta:g} seed={r.seed}"
            print(f"example {ex_id:2d} {label}: MAE={r.mae:.3e} "
                  f"m={r.m_final} iter={r.iterations}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "invert":
            return cli_invert(args)
        return cli_benchmark(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"lapinv: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

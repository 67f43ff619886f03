"""Command-line entry point.

    maple-sim run --input m.mtx --configs baseline-matraptor,maple-matraptor --format csv --out r.csv
    maple-sim run --synthetic fb,0.1,1 --configs all --format json
    maple-sim validate --input m.mtx

Failures exit nonzero after printing one ``error: <Kind>: <message>`` line
to stderr.
"""

from __future__ import annotations

import argparse
import sys

from .accel import PRESETS
from .bench import BENCH_MATRICES, RunSpec, SyntheticSpec, emit_report, render_report, run_benchmark
from .csr import read_matrix_market, validate_csr
from .errors import MapleSimError


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maple-sim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate C = A x A across configurations")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="Matrix Market file")
    src.add_argument("--synthetic", metavar="R,C,D,SEED", help="or PRESET[,SCALE[,SEED]], e.g. fb,0.1")
    run.add_argument(
        "--configs", default="all",
        help=f"comma-separated presets or .json config files; 'all' = {','.join(PRESETS)}",
    )
    run.add_argument("--energy-table", default="default", help="'Kind = value' file or 'default'")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--out", help="output path (stdout if omitted)")

    val = sub.add_parser("validate", help="check the CSR structure of a Matrix Market file")
    val.add_argument("--input", required=True)

    sub.add_parser("presets", help="list accelerator presets and benchmark matrix shapes")
    return parser


def _run(args) -> int:
    configs = list(PRESETS) if args.configs == "all" else [c.strip() for c in args.configs.split(",") if c.strip()]
    source = SyntheticSpec.parse(args.synthetic) if args.synthetic else args.input
    spec = RunSpec(source, configs, args.energy_table, args.format, args.out)
    result = run_benchmark(spec)
    if args.out:
        emit_report(result, args.format, args.out)
    else:
        sys.stdout.write(render_report(result, args.format))
    return 0


def _validate(args) -> int:
    report = validate_csr(read_matrix_market(args.input))
    print(report.format())
    if not report.ok:
        print(f"error: ValidationError: {len(report.violations)} violation(s) in {args.input}", file=sys.stderr)
        return 1
    return 0


def _presets(_args) -> int:
    for name, cfg in PRESETS.items():
        levels = " ".join(f"{lv.level}:{lv.role}" for lv in cfg.memory_levels)
        print(f"{name:20s} {cfg.pe_count:4d} PEs x {cfg.macs_per_pe:2d} MACs  {cfg.interconnect:8s} {levels}")
    print()
    for name, (short, dim, nnz, density) in BENCH_MATRICES.items():
        print(f"{short:3s} {name:15s} {dim:>8d} {nnz:>9d} {density:.1e}")
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handler = {"run": _run, "validate": _validate, "presets": _presets}[args.command]
    try:
        return handler(args)
    except MapleSimError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

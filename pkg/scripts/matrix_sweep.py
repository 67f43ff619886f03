"""Run the density-matched benchmark matrices under every preset.

Writes the per-run report (CSV or JSON) and prints, per Maple/baseline
pairing, the speedup and the energy-benefit range over random valid
energy tables.

    python3 scripts/matrix_sweep.py --scale 0.1 --seed 0 --tables 20 --out sweep.csv
"""

import argparse
import sys

import numpy as np

from maple_sim.accel import PAIRINGS, PRESETS
from maple_sim.bench import BENCH_MATRICES, RunSpec, SyntheticSpec, emit_report, render_report, run_benchmark
from maple_sim.cost import compare_reports, compute_energy, random_valid_table


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", type=float, default=0.1, help="linear scale applied to each matrix dimension")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tables", type=int, default=20, help="random energy tables for the robustness check")
    ap.add_argument("--energy-table", default="default")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--out", help="report path (stdout when omitted)")
    ap.add_argument("--matrices", nargs="*", default=list(BENCH_MATRICES))
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    tables = [random_valid_table(rng) for _ in range(args.tables)]
    results = []
    print(f"{'matrix':<12} {'pairing':<16} {'cyc_base':>9} {'cyc_maple':>9} {'speedup%':>9} "
          f"{'benefit%':>9} {'min%':>7} {'max%':>7}", file=sys.stderr)
    for name in args.matrices:
        spec = SyntheticSpec.from_preset(name, args.scale, args.seed)
        res = run_benchmark(RunSpec(spec, list(PRESETS), energy_table=args.energy_table))
        results.append(res)
        by_name = {r.config.name: r for r in res.runs}
        for base, maple in PAIRINGS.items():
            b, m = by_name[base], by_name[maple]
            cmp = res.comparisons[maple]
            spread = [
                compare_reports((m.sim, compute_energy(m.sim.events, t)),
                                (b.sim, compute_energy(b.sim.events, t))).energy_benefit_pct
                for t in tables
            ] or [cmp.energy_benefit_pct]
            print(f"{spec.label:<12} {maple:<16} {b.sim.total_cycles:>9} {m.sim.total_cycles:>9} "
                  f"{cmp.speedup_pct:>9.1f} {cmp.energy_benefit_pct:>9.1f} {min(spread):>7.1f} {max(spread):>7.1f}",
                  file=sys.stderr)

    if args.out:
        emit_report(results, args.format, args.out)
    else:
        sys.stdout.write(render_report(results, args.format))
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Run a full precision-vs-speedup sweep and write report + curve CSVs.

Defaults reproduce a desk-scale comparison of all four methods on synthetic
normal data. Any SweepConfig field can be overridden with --set key=value;
see `bmips bench --help` for the same interface via the installed CLI.

Example:
    python3 scripts/run_benchmark.py --out results/sweep \
        --set n=65536 --set k=64 --queries 200
"""

import argparse
import sys

from bmips.bench import SweepConfig, emit_csv, emit_curve_data, run_sweep
from bmips.cli import _parse_config_pairs
from bmips.matrix import DataError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", required=True, metavar="PREFIX")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    parser.add_argument("--queries", type=int, default=None)
    args = parser.parse_args(argv)

    fields = {
        "n": 2**16, "k": 64, "n_queries": 200, "seed": 0, "reps": 3,
        "budgets": tuple(2**i for i in range(5, 13)),
        "lsh_a": (4, 8, 16), "lsh_b": (2, 8, 32),
    }
    try:
        fields.update(_parse_config_pairs(args.set))
        if args.queries is not None:
            fields["n_queries"] = args.queries
        config = SweepConfig(**fields)
        report = run_sweep(config)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3

    emit_csv(report, f"{args.out}.report.csv")
    emit_curve_data(report, f"{args.out}.curves.csv")
    print(f"{'method':<8} {'params':<16} {'prec@5':>7} {'prec@10':>8} "
          f"{'ms/query':>9} {'speedup':>8}")
    for row in report.rows:
        print(f"{row['method']:<8} {row['params']:<16} {row['prec_at_5']:>7.3f} "
              f"{row['prec_at_10']:>8.3f} {row['total_ms']:>9.3f} "
              f"{row['speedup']:>8.2f}")
    print(f"wrote {args.out}.report.csv and {args.out}.curves.csv")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

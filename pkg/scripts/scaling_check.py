#!/usr/bin/env python3
"""Measure screening cost against n and B: the per-query screen should be
budget-bound (grow with B), not corpus-bound (flat in n).

Prints median per-query screen time (preprocessing included) for a grid of
corpus sizes and budgets.

Example:
    python3 scripts/scaling_check.py --k 32 --queries 24 --reps 5
"""

import argparse

import numpy as np

from bmips import build_index, gen_synthetic
from bmips.bench import measure_screening


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--k", type=int, default=32)
    parser.add_argument("--queries", type=int, default=24)
    parser.add_argument("--reps", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--n-exponents", type=int, nargs="+",
                        default=[15, 16, 17, 18])
    parser.add_argument("--budgets", type=int, nargs="+",
                        default=[128, 256, 512, 1024])
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed + 1)
    queries = rng.standard_normal((args.queries, args.k))

    header = "n".rjust(9) + "".join(f"  B={b}".rjust(12) for b in args.budgets)
    print(header)
    for i, exp in enumerate(args.n_exponents):
        n = 2**exp
        matrix = gen_synthetic(n, args.k, seed=args.seed + i)
        index = build_index(matrix)
        cells = []
        for B in args.budgets:
            med = float(np.median(measure_screening(index, queries, B,
                                                    reps=args.reps)))
            cells.append(f"{med * 1e6:9.1f}us".rjust(12))
        print(f"{n:>9}" + "".join(cells))
        del matrix, index
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line front end: gen / build / query / bench subcommands.

Exit codes: 0 success, 2 usage error (argparse), 3 data or I/O error.
Item indices in all output are 0-based, matching the library API.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import bench as bench_mod
from .index import build_index, load_index, save_index
from .matrix import (CandidateMatrix, DataError, DISTRIBUTIONS, gen_synthetic,
                     load_matrix, save_matrix)
from .nns import lsh_build, lsh_screen, reduce_A, reduce_query_A
from .query import QueryContext
from .ranking import budgeted_search, naive_topk, rank_candidates, write_results_csv
from .sampling import sample_screen, sampler_build

_EXT = {"bin": "bin", "txt": "txt"}


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


# ---- subcommand implementations ----

def cmd_gen(args) -> int:
    matrix = gen_synthetic(args.n, args.k, seed=args.seed,
                           distribution=args.dist)
    # Queries are always standard normal so negative weights get exercised
    # regardless of the candidate distribution.
    rng = np.random.default_rng(args.seed + 1)
    queries = CandidateMatrix(
        rng.standard_normal((args.num_queries, args.k)).astype(np.float32))
    ext = _EXT[args.format]
    mpath = f"{args.out}.matrix.{ext}"
    qpath = f"{args.out}.queries.{ext}"
    save_matrix(matrix, mpath, format=args.format)
    save_matrix(queries, qpath, format=args.format)
    print(f"wrote {mpath} (n={args.n}, k={args.k}, dist={args.dist})")
    print(f"wrote {qpath} ({args.num_queries} queries)")
    return 0


def cmd_build(args) -> int:
    matrix = load_matrix(args.matrix)
    t0 = time.perf_counter()
    index = build_index(matrix)
    dt = time.perf_counter() - t0
    save_index(index, args.out)
    print(f"built index for n={matrix.n}, k={matrix.k} in {dt:.3f}s -> {args.out}")
    return 0


def _load_queries(path: str, k: int) -> np.ndarray:
    queries = load_matrix(path)
    if queries.k != k:
        raise DataError(f"query width {queries.k} does not match matrix k={k}")
    return queries.values_f64


def cmd_query(args) -> int:
    matrix = load_matrix(args.matrix)
    queries = _load_queries(args.queries, matrix.k)
    B = args.budget
    K = args.topk
    if args.method in ("greedy", "sample") and K > B:
        _warn(f"topk {K} exceeds budget {B}; clamping to {B}")
        K = B

    results = []
    if args.method == "naive":
        for qi in range(queries.shape[0]):
            results.append(naive_topk(matrix, queries[qi], K))
    elif args.method == "greedy":
        if args.index is None:
            raise DataError("--index is required for --method greedy")
        index = load_index(args.index, matrix)
        ctx = QueryContext(index)
        for qi in range(queries.shape[0]):
            results.append(budgeted_search(index, ctx, queries[qi], B, K))
    elif args.method == "sample":
        sidx = sampler_build(matrix)
        for qi in range(queries.shape[0]):
            cand = sample_screen(sidx, queries[qi], None, B, seed=args.seed)
            results.append(rank_candidates(matrix, queries[qi], cand, K))
    else:  # lsh
        reduced = reduce_A(matrix)
        lidx = lsh_build(reduced, a=args.lsh_a, b=args.lsh_b, seed=args.seed)
        for qi in range(queries.shape[0]):
            cand = lsh_screen(lidx, reduce_query_A(queries[qi]))
            results.append(rank_candidates(matrix, queries[qi], cand, K))

    if args.out is None:
        write_results_csv(sys.stdout, results)
    else:
        write_results_csv(args.out, results)
        print(f"wrote {args.out} ({len(results)} queries, method={args.method})")
    return 0


_TUPLE_INT = ("budgets", "sample_budgets", "lsh_a", "lsh_b")


def _parse_config_pairs(pairs: list[str]) -> dict:
    """key=value strings -> SweepConfig field dict with typed values."""
    out: dict = {}
    valid = set(bench_mod.SweepConfig.__dataclass_fields__)
    for raw in pairs:
        key, sep, value = raw.partition("=")
        key = key.strip()
        if not sep or key not in valid:
            raise DataError(f"bad config entry {raw!r}; keys: {sorted(valid)}")
        value = value.strip()
        if key == "methods":
            out[key] = tuple(m.strip() for m in value.split(",") if m.strip())
        elif key in _TUPLE_INT:
            out[key] = tuple(int(v) for v in value.split(","))
        elif key in ("n", "k", "n_queries", "seed", "topk", "reps",
                     "lsh_seed", "reduce_kbar"):
            out[key] = int(value)
        elif key == "reduce_u":
            out[key] = float(value)
        else:
            out[key] = value
    return out


def cmd_bench(args) -> int:
    pairs: list[str] = []
    if args.config is not None:
        with open(args.config) as f:
            for line in f:
                line = line.strip()
                if line and not line.startswith("#"):
                    pairs.append(line)
    pairs.extend(args.set or [])
    fields = _parse_config_pairs(pairs)
    if args.queries is not None:
        fields["n_queries"] = args.queries
    if args.seed is not None:
        fields["seed"] = args.seed
    config = bench_mod.SweepConfig(**fields)
    bad = [m for m in config.methods if m not in bench_mod.METHODS]
    if bad:
        raise DataError(f"unknown method(s) {bad}; valid: {list(bench_mod.METHODS)}")

    report = bench_mod.run_sweep(config)
    report_path = f"{args.out}.report.csv"
    curve_path = f"{args.out}.curves.csv"
    bench_mod.emit_csv(report, report_path)
    bench_mod.emit_curve_data(report, curve_path)

    print(f"{'method':<8} {'params':<16} {'prec@5':>7} {'prec@10':>8} "
          f"{'ms/query':>9} {'speedup':>8}")
    for row in report.rows:
        print(f"{row['method']:<8} {row['params']:<16} {row['prec_at_5']:>7.3f} "
              f"{row['prec_at_10']:>8.3f} {row['total_ms']:>9.3f} "
              f"{row['speedup']:>8.2f}")
    print(f"wrote {report_path} and {curve_path}")
    return 0


# ---- parser ----

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bmips",
        description="Budgeted inner-product search: candidate screening "
                    "plus exact re-ranking.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("gen", help="generate a synthetic matrix + query file")
    p.add_argument("--n", type=int, required=True, help="number of candidates")
    p.add_argument("--k", type=int, required=True, help="embedding dimension")
    p.add_argument("--dist", choices=DISTRIBUTIONS, default="normal")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--num-queries", type=int, default=100)
    p.add_argument("--format", choices=sorted(_EXT), default="bin")
    p.add_argument("--out", required=True, metavar="PREFIX",
                   help="writes PREFIX.matrix.EXT and PREFIX.queries.EXT")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("build", help="build and save the screening index")
    p.add_argument("--matrix", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="run budgeted queries against a matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--index", help="index file (required for --method greedy)")
    p.add_argument("--queries", required=True, help="query matrix file")
    p.add_argument("--budget", type=int, default=128)
    p.add_argument("--topk", type=int, default=10)
    p.add_argument("--method", choices=("greedy", "naive", "lsh", "sample"),
                   default="greedy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lsh-a", type=int, default=8, help="hyperplanes per table")
    p.add_argument("--lsh-b", type=int, default=32, help="number of tables")
    p.add_argument("--out", help="results CSV path (default: stdout)")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("bench", help="run a precision/speedup sweep")
    p.add_argument("--config", help="key=value file of sweep settings")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a single sweep setting (repeatable)")
    p.add_argument("--queries", type=int, help="override query count")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, metavar="PREFIX",
                   help="writes PREFIX.report.csv and PREFIX.curves.csv")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return int(code) if code is not None else 0
    try:
        return args.func(args)
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())

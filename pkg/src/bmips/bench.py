"""Evaluation harness: exact ground truth, precision@K, and timed sweeps.

A sweep runs each configured screening method over a shared query set and
reports precision against the exact top-K together with per-query wall time
and speedup relative to the exhaustive baseline. Timing is sequential with
BLAS pinned to one thread; the quality pass may fan out over BMIPS_THREADS
worker threads (the compiled screen kernel releases the GIL).

Report CSVs carry run metadata in leading '#' comment lines so a results
file is self-describing.
"""

from __future__ import annotations

import csv
import os
import platform
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from .index import GreedyIndex, build_index
from .matrix import CandidateMatrix, DataError, gen_synthetic, load_matrix
from .nns import lsh_build, lsh_screen, reduce_A, reduce_B, reduce_query_A, reduce_query_B
from .query import QueryContext, screen_improved
from .ranking import naive_topk, rank_candidates
from .sampling import sample_screen, sampler_build

METHODS = ("greedy", "naive", "lsh", "sample")


# ---- ground truth and precision ----

@dataclass(eq=False)
class GroundTruth:
    indices: np.ndarray  # (n_queries, depth) int64, exact top ids per query
    scores: np.ndarray   # (n_queries, depth) float64
    depth: int


def compute_ground_truth(matrix: CandidateMatrix, queries: np.ndarray,
                         depth: int = 10) -> GroundTruth:
    """Exact top-`depth` per query by full scoring (the evaluation oracle)."""
    queries = np.asarray(queries, dtype=np.float64)
    if queries.ndim != 2 or queries.shape[1] != matrix.k:
        raise DataError(f"queries must be (q, {matrix.k}), got {queries.shape}")
    depth = min(depth, matrix.n)
    idx = np.empty((queries.shape[0], depth), dtype=np.int64)
    sco = np.empty((queries.shape[0], depth), dtype=np.float64)
    for qi in range(queries.shape[0]):
        res = naive_topk(matrix, queries[qi], depth)
        idx[qi] = res.indices
        sco[qi] = res.scores
    return GroundTruth(indices=idx, scores=sco, depth=depth)


def precision_at_K(pred_indices: np.ndarray, truth_indices: np.ndarray,
                   K: int) -> float:
    """|top-K prediction intersect exact top-K| / K (K clamped to truth depth)."""
    kk = min(K, truth_indices.shape[0])
    if kk == 0:
        return 0.0
    pred = np.asarray(pred_indices, dtype=np.int64)[:kk]
    if pred.shape[0] == 0:
        return 0.0
    hits = np.intersect1d(pred, truth_indices[:kk]).shape[0]
    return hits / kk


# ---- timing helpers ----

def _median_seconds(fn, reps: int, warmup: int = 1) -> float:
    """Median wall time of fn() over reps runs, after warmup runs."""
    for _ in range(max(warmup, 0)):
        fn()
    samples = np.empty(reps, dtype=np.float64)
    for r in range(reps):
        t0 = time.perf_counter_ns()
        fn()
        samples[r] = time.perf_counter_ns() - t0
    return float(np.median(samples)) * 1e-9


def measure_screening(index: GreedyIndex, queries: np.ndarray, budget: int,
                      reps: int = 5) -> np.ndarray:
    """Per-query median seconds for the improved screen (preprocess included).

    Sequential and BLAS-pinned; this is the primitive behind the scaling
    checks, so it times the screen alone without the re-ranking pass.
    """
    ctx = QueryContext(index)
    out = np.empty(queries.shape[0], dtype=np.float64)
    with threadpool_limits(limits=1):
        for qi in range(queries.shape[0]):
            w = np.ascontiguousarray(queries[qi], dtype=np.float64)
            out[qi] = _median_seconds(lambda: screen_improved(ctx, w, budget), reps)
    return out


def n_workers() -> int:
    """Quality-pass thread count; BMIPS_THREADS overrides, default 1."""
    raw = os.environ.get("BMIPS_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# ---- sweep configuration and report ----

@dataclass
class SweepConfig:
    n: int = 2**14
    k: int = 32
    n_queries: int = 100
    seed: int = 0
    distribution: str = "normal"
    methods: tuple[str, ...] = METHODS
    budgets: tuple[int, ...] | None = None       # default: power-of-two grid
    topk: int = 10
    reps: int = 3
    lsh_a: tuple[int, ...] = (4, 8, 16)
    lsh_b: tuple[int, ...] = (2, 8, 32)
    lsh_seed: int = 7
    reduce_variant: str = "A"                    # MIPS-to-NNS reduction for lsh
    reduce_u: float = 0.83
    reduce_kbar: int = 3
    sample_budgets: tuple[int, ...] | None = None  # default: same grid
    matrix_path: str | None = None               # generate when absent
    queries_path: str | None = None


@dataclass
class EvalReport:
    rows: list[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


def default_budget_grid(n: int) -> tuple[int, ...]:
    """Powers of two from 32 up to n, with n itself as the last point."""
    grid = [b for b in (2**i for i in range(5, 31)) if b < n]
    grid.append(n)
    return tuple(grid)


def _gen_queries(k: int, n_queries: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n_queries, k))


def _load_inputs(config: SweepConfig) -> tuple[CandidateMatrix, np.ndarray]:
    if config.matrix_path is not None:
        matrix = load_matrix(config.matrix_path)
    else:
        matrix = gen_synthetic(config.n, config.k, seed=config.seed,
                               distribution=config.distribution)
    if config.queries_path is not None:
        queries = load_matrix(config.queries_path).values_f64
        if queries.shape[1] != matrix.k:
            raise DataError("query width does not match matrix")
        queries = queries[: config.n_queries]
    else:
        queries = _gen_queries(matrix.k, config.n_queries, config.seed + 1)
    return matrix, queries


def _quality_map(queries: np.ndarray, candidates_fn) -> list[np.ndarray]:
    """candidates_fn(w) -> id array, evaluated per query, maybe threaded."""
    workers = n_workers()
    if workers <= 1:
        return [candidates_fn(queries[qi]) for qi in range(queries.shape[0])]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda qi: candidates_fn(queries[qi]),
                             range(queries.shape[0])))


def _evaluate(matrix: CandidateMatrix, queries: np.ndarray, truth: GroundTruth,
              topk: int, reps: int, candidates_fn, timed_fn) -> dict:
    """Precision + timing for one method configuration.

    candidates_fn(w) -> candidate ids (quality pass, every query).
    timed_fn(w) -> None, one full query (screen + rank), timed per query.
    """
    cand_per_query = _quality_map(queries, candidates_fn)
    p5 = np.empty(len(cand_per_query))
    p10 = np.empty(len(cand_per_query))
    sizes = np.empty(len(cand_per_query))
    for qi, cand in enumerate(cand_per_query):
        res = rank_candidates(matrix, queries[qi], cand, topk)
        p5[qi] = precision_at_K(res.indices, truth.indices[qi], 5)
        p10[qi] = precision_at_K(res.indices, truth.indices[qi], min(10, topk))
        sizes[qi] = cand.shape[0]
    times = np.empty(queries.shape[0], dtype=np.float64)
    with threadpool_limits(limits=1):
        for qi in range(queries.shape[0]):
            w = np.ascontiguousarray(queries[qi], dtype=np.float64)
            times[qi] = _median_seconds(lambda: timed_fn(w), reps)
    return {
        "prec_at_5": float(p5.mean()),
        "prec_at_10": float(p10.mean()),
        "cand_mean": float(sizes.mean()),
        "total_ms": float(np.median(times)) * 1e3,
    }


def run_sweep(config: SweepConfig) -> EvalReport:
    """Run every configured method over one matrix/query set.

    Speedup is median naive per-query time divided by the method's median
    per-query time; the naive row itself is the 1.0x anchor.
    """
    matrix, queries = _load_inputs(config)
    budgets = config.budgets or default_budget_grid(matrix.n)
    budgets = tuple(int(b) for b in budgets if b <= matrix.n)
    sample_budgets = config.sample_budgets or budgets
    truth = compute_ground_truth(matrix, queries, depth=max(10, config.topk))

    report = EvalReport()
    report.metadata = {
        "n": matrix.n, "k": matrix.k, "n_queries": int(queries.shape[0]),
        "seed": config.seed, "distribution": config.distribution,
        "topk": config.topk, "reps": config.reps,
        "budgets": ",".join(str(b) for b in budgets),
        "reduce_variant": config.reduce_variant,
        "numpy": np.__version__, "machine": platform.machine(),
        "cpu_count": os.cpu_count() or 1,
    }

    # Exhaustive baseline, also the speedup denominator.
    naive_times = np.empty(queries.shape[0], dtype=np.float64)
    with threadpool_limits(limits=1):
        for qi in range(queries.shape[0]):
            w = np.ascontiguousarray(queries[qi], dtype=np.float64)
            naive_times[qi] = _median_seconds(
                lambda: naive_topk(matrix, w, config.topk), config.reps)
    naive_ms = float(np.median(naive_times)) * 1e3
    if "naive" in config.methods:
        report.rows.append({
            "method": "naive", "params": f"n={matrix.n}", "budget": matrix.n,
            "prec_at_5": 1.0, "prec_at_10": 1.0, "cand_mean": float(matrix.n),
            "total_ms": naive_ms, "speedup": 1.0,
        })

    def add_row(method: str, params: str, budget: int, stats: dict) -> None:
        stats = dict(stats)
        stats["speedup"] = naive_ms / stats["total_ms"] if stats["total_ms"] > 0 else float("inf")
        report.rows.append({"method": method, "params": params,
                            "budget": budget, **stats})

    if "greedy" in config.methods:
        t0 = time.perf_counter()
        index = build_index(matrix)
        report.metadata["greedy_build_s"] = round(time.perf_counter() - t0, 3)
        tls = threading.local()  # context scratch is not shareable across threads
        ctx_timed = QueryContext(index)
        for B in budgets:
            def cand_fn(w, B=B):
                ctx = getattr(tls, "ctx", None)
                if ctx is None:
                    ctx = tls.ctx = QueryContext(index)
                return screen_improved(ctx, w, B)

            def timed_fn(w, B=B):
                cand = screen_improved(ctx_timed, w, B)
                rank_candidates(matrix, w, cand, config.topk)

            add_row("greedy", f"B={B}", B,
                    _evaluate(matrix, queries, truth, config.topk,
                              config.reps, cand_fn, timed_fn))

    if "lsh" in config.methods:
        if config.reduce_variant == "A":
            reduced = reduce_A(matrix)
            reduce_query = reduce_query_A
        else:
            reduced = reduce_B(matrix, U=config.reduce_u, kbar=config.reduce_kbar)
            reduce_query = lambda w: reduce_query_B(w, config.reduce_kbar)
        for a in config.lsh_a:
            for b in config.lsh_b:
                t0 = time.perf_counter()
                lidx = lsh_build(reduced, a=a, b=b, seed=config.lsh_seed)
                report.metadata[f"lsh_build_s_a{a}_b{b}"] = round(time.perf_counter() - t0, 3)

                def cand_fn(w, lidx=lidx):
                    return lsh_screen(lidx, reduce_query(w))

                def timed_fn(w, lidx=lidx):
                    cand = lsh_screen(lidx, reduce_query(w))
                    rank_candidates(matrix, w, cand, config.topk)

                add_row("lsh", f"a={a},b={b}", 0,
                        _evaluate(matrix, queries, truth, config.topk,
                                  config.reps, cand_fn, timed_fn))

    if "sample" in config.methods:
        sidx = sampler_build(matrix)
        for B in sample_budgets:
            def cand_fn(w, B=B):
                return sample_screen(sidx, w, None, B, seed=config.seed + 2)

            def timed_fn(w, B=B):
                cand = sample_screen(sidx, w, None, B, seed=config.seed + 2)
                rank_candidates(matrix, w, cand, config.topk)

            add_row("sample", f"S=B={B}", B,
                    _evaluate(matrix, queries, truth, config.topk,
                              config.reps, cand_fn, timed_fn))

    return report


# ---- CSV emission ----

REPORT_COLUMNS = ("method", "params", "budget", "prec_at_5", "prec_at_10",
                  "cand_mean", "total_ms", "speedup")


def emit_csv(report: EvalReport, path: str) -> None:
    """Write the sweep report; metadata rides along as '#' comment lines."""
    with open(path, "w", newline="") as f:
        for key in sorted(report.metadata):
            f.write(f"# {key}={report.metadata[key]}\n")
        writer = csv.DictWriter(f, fieldnames=REPORT_COLUMNS)
        writer.writeheader()
        for row in report.rows:
            out = dict(row)
            for col in ("prec_at_5", "prec_at_10", "cand_mean", "total_ms", "speedup"):
                out[col] = format(float(out[col]), ".17g")
            writer.writerow(out)


def emit_curve_data(report: EvalReport, path: str) -> None:
    """Precision-vs-speedup curves: per-method rows ordered by speedup."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["method", "speedup", "prec_at_5", "prec_at_10"])
        for method in sorted({row["method"] for row in report.rows}):
            rows = [r for r in report.rows if r["method"] == method]
            rows.sort(key=lambda r: r["speedup"])
            for r in rows:
                writer.writerow([method, format(r["speedup"], ".17g"),
                                 format(r["prec_at_5"], ".17g"),
                                 format(r["prec_at_10"], ".17g")])


def load_report_csv(path: str) -> EvalReport:
    """Inverse of emit_csv, for round-trip checks and plotting scripts."""
    report = EvalReport()
    with open(path, newline="") as f:
        header_lines = []
        for line in f:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                report.metadata[key.strip()] = value
            else:
                header_lines.append(line)
        reader = csv.DictReader(header_lines)
        for row in reader:
            parsed: dict = dict(row)
            parsed["budget"] = int(row["budget"])
            for col in ("prec_at_5", "prec_at_10", "cand_mean", "total_ms", "speedup"):
                parsed[col] = float(row[col])
            report.rows.append(parsed)
    return report

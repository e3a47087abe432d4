"""Exact candidate ranking, top-K selection, naive baseline, search pipeline.

Scores are float64 inner products h_j . w computed by BLAS matvec over the
matrix's cached float64 values; ties always break by ascending candidate id.
Top-K selection runs through an average-linear partial selection
(np.partition introselect) with explicit handling of the threshold tie block;
a full-sort route is kept alongside and both must return identical results.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass

import numpy as np

from .index import GreedyIndex
from .matrix import CandidateMatrix, DataError, as_query
from .query import QueryContext, screen_improved

SELECT_METHODS = ("select", "sort")


@dataclass(eq=False)
class RankedResult:
    """Top-K ids and scores, score descending, ties ascending id."""

    indices: np.ndarray  # int64
    scores: np.ndarray   # float64
    requested_k: int

    def __len__(self) -> int:
        return int(self.indices.shape[0])

    @property
    def entries(self) -> list[tuple[int, float]]:
        return [(int(j), float(s)) for j, s in zip(self.indices, self.scores)]


def score_candidates(matrix: CandidateMatrix, w, candidates=None) -> np.ndarray:
    """Inner products of w with all rows (candidates=None) or a subset."""
    wq = as_query(w, matrix.k)
    if candidates is None:
        return matrix.values_f64 @ wq
    cand = np.asarray(candidates, dtype=np.int64)
    return matrix.values_f64[cand] @ wq


def topk_ids(scores: np.ndarray, ids: np.ndarray, K: int, method: str = "select") -> np.ndarray:
    """Positions (into scores/ids) of the top-K by (score desc, id asc).

    method="select": partial selection, then the threshold tie block is
    resolved by ascending id. method="sort": full lexsort fallback; both
    routes are exact and tested identical.
    """
    if method not in SELECT_METHODS:
        raise DataError(f"unknown selection method {method!r}")
    m = scores.shape[0]
    kk = min(K, m)
    if kk == 0:
        return np.empty(0, dtype=np.int64)
    if method == "sort" or kk == m:
        order = np.lexsort((ids, -scores))
        return order[:kk]
    threshold = np.partition(scores, m - kk)[m - kk]  # kk-th largest score
    above = np.flatnonzero(scores > threshold)        # at most kk-1 of these
    need = kk - above.shape[0]
    tie_pos = np.flatnonzero(scores == threshold)
    tie_take = tie_pos[np.argsort(ids[tie_pos], kind="stable")[:need]]
    chosen = np.concatenate([above, tie_take])
    order = np.lexsort((ids[chosen], -scores[chosen]))
    return chosen[order]


def rank_candidates(matrix: CandidateMatrix, w, candidates, K: int,
                    method: str = "select") -> RankedResult:
    """Exact scores over a screened candidate list, top-min(K,|C|) selected."""
    if K < 1:
        raise DataError(f"K must be >= 1, got {K}")
    cand = np.asarray(candidates, dtype=np.int64).reshape(-1)
    if cand.shape[0] == 0:
        return RankedResult(np.empty(0, dtype=np.int64), np.empty(0), K)
    if cand.shape[0] > 1 and np.unique(cand).shape[0] != cand.shape[0]:
        raise DataError("candidate list contains duplicate ids")
    if cand.min() < 0 or cand.max() >= matrix.n:
        raise IndexError("candidate id out of range")
    scores = score_candidates(matrix, w, cand)
    pos = topk_ids(scores, cand, K, method=method)
    return RankedResult(cand[pos], scores[pos], K)


def naive_topk(matrix: CandidateMatrix, w, K: int, method: str = "select") -> RankedResult:
    """Exact top-K over all n candidates: one matvec plus partial selection."""
    if K < 1:
        raise DataError(f"K must be >= 1, got {K}")
    scores = score_candidates(matrix, w)
    ids = np.arange(matrix.n, dtype=np.int64)
    pos = topk_ids(scores, ids, K, method=method)
    return RankedResult(pos.astype(np.int64), scores[pos], K)


def budgeted_search(index: GreedyIndex, ctx: QueryContext, w, B: int, K: int) -> RankedResult:
    """Screen (improved variant) then rank exactly; the budgeted pipeline.

    Query-dependent preprocessing and screening are timed together in
    ctx.screen_seconds; exact ranking in ctx.rank_seconds.
    """
    t0 = time.perf_counter()
    cand = screen_improved(ctx, w, B)
    t1 = time.perf_counter()
    result = rank_candidates(index.matrix, w, cand, K)
    ctx.rank_seconds = time.perf_counter() - t1
    ctx.screen_seconds = t1 - t0
    return result


def write_results_csv(path_or_file, results, query_ids=None) -> None:
    """Rows of query_id,rank,item_index,score; rank is 1-based per query.

    Accepts a path or an open text stream (the CLI passes stdout).
    """
    if hasattr(path_or_file, "write"):
        _write_result_rows(path_or_file, results, query_ids)
    else:
        with open(path_or_file, "w", newline="") as f:
            _write_result_rows(f, results, query_ids)


def _write_result_rows(f, results, query_ids) -> None:
    writer = csv.writer(f)
    writer.writerow(["query_id", "rank", "item_index", "score"])
    for qi, res in enumerate(results):
        qid = qi if query_ids is None else query_ids[qi]
        for r, (j, s) in enumerate(res.entries, start=1):
            writer.writerow([qid, r, j, f"{s:.17g}"])

"""Sampling-based screening: draw (j, t) proportional to |h_jt * w_t|.

Query-independent part: one alias table per dimension over |h[:,t]| (O(1)
per draw) plus the column L1 masses c_t. Query time: dimensions are drawn
proportional to |w_t| * c_t via one cumulative array (k is small), then ids
within each drawn dimension come from the alias tables; a candidate's hit
count estimates its share of the |z| mass. The screen returns the top-B ids
by (count desc, id asc). Counts are accumulated with np.unique over the <= S
drawn ids, so per-query work is independent of n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fast import build_alias_tables
from .matrix import CandidateMatrix, DataError, as_query

MAX_SAMPLES = 2**31


@dataclass(eq=False)
class SamplerIndex:
    """Per-dimension alias tables; immutable and query-independent."""

    prob: np.ndarray        # (k, n) float64 acceptance probabilities
    alias: np.ndarray       # (k, n) int64 alias targets
    col_weight: np.ndarray  # (k,) float64, c_t = sum_j |h[j,t]|
    n: int
    k: int

    @property
    def usable(self) -> np.ndarray:
        """Dimensions with nonzero mass; all-zero columns are never drawn."""
        return self.col_weight > 0


def sampler_build(matrix: CandidateMatrix) -> SamplerIndex:
    prob, alias, col_weight = build_alias_tables(matrix.values)
    if not np.any(col_weight > 0):
        raise DataError("all-zero matrix: nothing to sample")
    return SamplerIndex(prob=prob, alias=alias, col_weight=col_weight,
                        n=matrix.n, k=matrix.k)


def sample_pairs(sidx: SamplerIndex, w, S: int, rng: np.random.Generator):
    """Draw S entries (t_arr, j_arr) with p(j,t) proportional to |w_t*h_jt|.

    Returns empty arrays when every dimension has zero |w_t|*c_t mass.
    """
    if S < 1 or S > MAX_SAMPLES:
        raise DataError(f"sample count must be in 1..{MAX_SAMPLES}, got {S}")
    wq = as_query(w, sidx.k)
    mass = np.abs(wq) * sidx.col_weight
    total = mass.sum()
    if total <= 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    cum = np.cumsum(mass)
    t_arr = np.searchsorted(cum, rng.random(S) * total, side="right")
    t_arr = np.minimum(t_arr, sidx.k - 1).astype(np.int64)  # guard the fp edge
    slots = rng.integers(0, sidx.n, size=S)
    accept = rng.random(S) < sidx.prob[t_arr, slots]
    j_arr = np.where(accept, slots, sidx.alias[t_arr, slots]).astype(np.int64)
    return t_arr, j_arr


def sample_screen(sidx: SamplerIndex, w, S: int | None, B: int, seed: int) -> np.ndarray:
    """Top-B distinct ids by sampled hit count (count desc, id asc).

    S defaults to B, the coupling under which count ranking targets the
    budgeted screen; other S are exposed for sweeps. The output can be
    shorter than B when fewer distinct ids were drawn, and empty for
    zero-mass queries.
    """
    if B < 1:
        raise DataError(f"budget must be >= 1, got {B}")
    if S is None:
        S = B
    rng = np.random.default_rng(seed)
    _, j_arr = sample_pairs(sidx, w, S, rng)
    if j_arr.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    uniq, counts = np.unique(j_arr, return_counts=True)
    order = np.argsort(-counts, kind="stable")  # count desc, ties id asc
    return uniq[order[:B]]

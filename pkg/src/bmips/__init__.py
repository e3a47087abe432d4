"""Budgeted maximum inner product search.

Screens a candidate pool down to a caller-chosen budget B by walking
per-dimension sorted orders with a k-way merge frontier, then re-ranks
the survivors exactly. Baselines included for comparison: exhaustive
scoring, sign-random-projection LSH over a nearest-neighbor reduction,
and weight-proportional sampling.

All indices in the public API are 0-based.
"""

from .matrix import (CandidateMatrix, DataError, gen_synthetic, inner_product,
                     implicit_entry, load_matrix, rank_of, save_matrix)
from .index import GreedyIndex, build_index, index_from_bytes, index_to_bytes, \
    load_index, save_index
from .query import (JointIterator, QueryContext, greedy_rank_oracle,
                    query_preprocess, screen_basic, screen_improved)
from .ranking import (RankedResult, budgeted_search, naive_topk,
                      rank_candidates, write_results_csv)
from .nns import (LshIndex, ReducedCandidateSet, lsh_build, lsh_screen,
                  reduce_A, reduce_B, reduce_query_A, reduce_query_B)
from .sampling import SamplerIndex, sample_screen, sampler_build
from .bench import (EvalReport, GroundTruth, SweepConfig, compute_ground_truth,
                    emit_csv, emit_curve_data, precision_at_K, run_sweep)

__version__ = "0.1.0"

__all__ = [
    "CandidateMatrix", "DataError", "gen_synthetic", "inner_product",
    "implicit_entry", "load_matrix", "rank_of", "save_matrix",
    "GreedyIndex", "build_index", "index_from_bytes", "index_to_bytes",
    "load_index", "save_index",
    "JointIterator", "QueryContext", "greedy_rank_oracle",
    "query_preprocess", "screen_basic", "screen_improved",
    "RankedResult", "budgeted_search", "naive_topk", "rank_candidates",
    "write_results_csv",
    "LshIndex", "ReducedCandidateSet", "lsh_build", "lsh_screen",
    "reduce_A", "reduce_B", "reduce_query_A", "reduce_query_B",
    "SamplerIndex", "sample_screen", "sampler_build",
    "EvalReport", "GroundTruth", "SweepConfig", "compute_ground_truth",
    "emit_csv", "emit_curve_data", "precision_at_K", "run_sweep",
    "__version__",
]

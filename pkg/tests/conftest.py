"""Shared fixtures: the worked 7x3 example and random-instance helpers.

TOY is the hand-checked fixture used across the suite; all expectations on
it were derived by hand before the implementation existed. Indices are
0-based everywhere; 1-based write-ups of the same example shift every
id up by one.
"""

import numpy as np
import pytest

from bmips import CandidateMatrix, build_index

# Rows j=0..6; with w = [1, 1, 0.1] the best-first screen order is
# 5, 0, 6, 1, 2, 3, 4 (max implicit entries 7, 6.9, 6, 5.9, 4.9, 3.9, 2.9).
TOY_VALUES = np.array([
    [-5.0, 5.0, 69.0],
    [-6.0, 4.0, 59.0],
    [-7.0, 3.0, 49.0],
    [-1.0, 2.0, 39.0],
    [-2.0, 1.0, 29.0],
    [-3.0, 7.0, 19.0],
    [-4.0, 6.0, 9.0],
], dtype=np.float32)

TOY_W = np.array([1.0, 1.0, 0.1])

# Per-dimension descending orders of TOY_VALUES columns.
TOY_SORTED = np.array([
    [3, 4, 5, 6, 0, 1, 2],
    [5, 6, 0, 1, 2, 3, 4],
    [0, 1, 2, 3, 4, 5, 6],
], dtype=np.uint32)

TOY_GREEDY_ORDER = [5, 0, 6, 1, 2, 3, 4]
TOY_TRUE_ORDER = [0, 5, 3, 1, 6, 4, 2]  # by h_j . w: 6.9, 5.9, 4.9, ...


@pytest.fixture
def toy_matrix():
    return CandidateMatrix(TOY_VALUES.copy())


@pytest.fixture
def toy_index(toy_matrix):
    return build_index(toy_matrix)


def random_instance(rng, n_max=128, k_max=10, quantize_prob=0.3,
                    zero_w_prob=0.2):
    """Matrix + query with deliberate tie and zero-weight regimes."""
    n = int(rng.integers(2, n_max + 1))
    k = int(rng.integers(1, k_max + 1))
    if rng.random() < 0.5:
        values = rng.standard_normal((n, k)).astype(np.float32)
    else:
        values = rng.random((n, k), dtype=np.float32)
    if rng.random() < quantize_prob:
        values = np.round(values * 4).astype(np.float32)  # force duplicates
    w = rng.standard_normal(k)
    if rng.random() < zero_w_prob:
        w[rng.random(k) < 0.4] = 0.0
    return CandidateMatrix(values), w


def slow_topk_entries(matrix, w, K):
    """Independent ranking oracle: python sort by (score desc, id asc)."""
    scores = [(float(matrix.values_f64[j] @ np.asarray(w, dtype=np.float64)), j)
              for j in range(matrix.n)]
    scores.sort(key=lambda t: (-t[0], t[1]))
    return [(j, s) for s, j in scores[:K]]

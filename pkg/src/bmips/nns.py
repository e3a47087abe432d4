"""MIPS-to-NNS reductions and the sign-projection LSH screening baseline.

Two reductions make inner-product order coincide with (approximate)
Euclidean-nearest order. Reduction A appends one column sqrt(M - |h_j|^2)
(M = max squared row norm) so every augmented row has squared norm exactly M;
queries append a zero. Reduction B first scales all rows to norm <= U < 1,
then appends kbar columns 1/2 - |h_j|^(2^i), i=1..kbar, driving all squared
norms to kbar/4 + |h_j|^(2^(kbar+1)) with the data-dependent term vanishing
geometrically; queries append kbar zeros.

LSH screening hashes the reduced vectors with b tables of a sign random
projections each (AND width a packed into one integer signature, OR across
the b tables); a query's candidate list is the first-seen union of its b
matching buckets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .matrix import CandidateMatrix, DataError, as_query


@dataclass(eq=False)
class ReducedCandidateSet:
    """Augmented candidate vectors plus the transform's parameters."""

    values: np.ndarray        # (n, k + extra) float64
    variant: str              # "A" or "B"
    source_k: int
    M: float = 0.0            # A: shared squared norm
    U: float = 0.0            # B: norm cap after scaling
    kbar: int = 0             # B: appended dimensions
    scale: float = 1.0        # B: factor applied to the source rows


def reduce_A(matrix: CandidateMatrix) -> ReducedCandidateSet:
    """Append sqrt(M - |h_j|^2); all augmented rows get squared norm M."""
    values = matrix.values_f64
    sq_norms = np.einsum("ij,ij->i", values, values)
    M = float(sq_norms.max())
    # clip tiny negatives from cancellation at the max-norm rows
    extra = np.sqrt(np.maximum(M - sq_norms, 0.0))
    out = np.concatenate([values, extra[:, None]], axis=1)
    return ReducedCandidateSet(values=out, variant="A", source_k=matrix.k, M=M)


def reduce_query_A(w) -> np.ndarray:
    wq = np.asarray(w, dtype=np.float64).reshape(-1)
    return np.concatenate([wq, [0.0]])


def reduce_B(matrix: CandidateMatrix, U: float = 0.83, kbar: int = 3) -> ReducedCandidateSet:
    """Scale rows to norm <= U < 1, then append 1/2 - |h|^(2^i), i=1..kbar.

    kbar=0 is the degenerate identity (no scaling, no appended columns).
    """
    if not U < 1:
        raise DataError(f"reduction B needs U < 1, got U={U}")
    if kbar < 0:
        raise DataError(f"kbar must be >= 0, got {kbar}")
    values = matrix.values_f64
    if kbar == 0:
        return ReducedCandidateSet(values=values.copy(), variant="B",
                                   source_k=matrix.k, U=U, kbar=0, scale=1.0)
    norms = np.sqrt(np.einsum("ij,ij->i", values, values))
    max_norm = float(norms.max())
    scale = U / max_norm if max_norm > 0 else 1.0
    scaled = values * scale
    snorm = norms * scale
    cols = []
    power = snorm  # |h|^(2^0), squared once per appended column
    for _ in range(kbar):
        power = power * power
        cols.append(0.5 - power)
    out = np.concatenate([scaled] + [c[:, None] for c in cols], axis=1)
    return ReducedCandidateSet(values=out, variant="B", source_k=matrix.k,
                               U=U, kbar=kbar, scale=scale)


def reduce_query_B(w, kbar: int) -> np.ndarray:
    wq = np.asarray(w, dtype=np.float64).reshape(-1)
    return np.concatenate([wq, np.zeros(kbar)])


@dataclass(eq=False)
class LshIndex:
    """b sign-projection hash tables of AND-width a over reduced vectors."""

    a: int
    b: int
    seed: int
    dim: int
    hyperplanes: np.ndarray             # (b, a, dim) float64
    tables: list[dict[int, np.ndarray]] = field(default_factory=list)


def _signatures(planes: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Packed a-bit signatures for each (table, vector): (b, len(vectors)) u64."""
    b, a, dim = planes.shape
    flat = planes.reshape(b * a, dim).T
    weights = (np.uint64(1) << np.arange(a, dtype=np.uint64))
    m = vectors.shape[0]
    out = np.empty((b, m), dtype=np.uint64)
    step = 8192  # bound the (chunk, b*a) projection buffer
    for lo in range(0, m, step):
        chunk = vectors[lo:lo + step]
        bits = (chunk @ flat >= 0).astype(np.uint64).reshape(-1, b, a)
        out[:, lo:lo + step] = np.einsum("mba,a->bm", bits, weights, dtype=np.uint64)
    return out


def lsh_build(reduced, a: int, b: int, seed: int) -> LshIndex:
    """Hash every candidate into each of the b tables; deterministic per seed.

    Accepts a ReducedCandidateSet or a plain (n, dim) array.
    """
    if a < 1 or a > 64:
        raise DataError(f"AND width a must be in 1..64, got {a}")
    if b < 1:
        raise DataError(f"table count b must be >= 1, got {b}")
    if isinstance(reduced, ReducedCandidateSet):
        reduced = reduced.values
    reduced = np.asarray(reduced, dtype=np.float64)
    n, dim = reduced.shape
    rng = np.random.default_rng(seed)
    planes = rng.standard_normal((b, a, dim))
    sigs = _signatures(planes, reduced)
    tables: list[dict[int, np.ndarray]] = []
    for tbl in range(b):
        keys = sigs[tbl]
        order = np.argsort(keys, kind="stable")  # buckets come out id-ascending
        sorted_keys = keys[order]
        boundaries = np.flatnonzero(np.diff(sorted_keys)) + 1
        groups = np.split(order.astype(np.int64), boundaries)
        table = {int(keys[g[0]]): g for g in groups}
        tables.append(table)
    return LshIndex(a=a, b=b, seed=seed, dim=dim, hyperplanes=planes, tables=tables)


def lsh_screen(index: LshIndex, w_hat) -> np.ndarray:
    """Union of the query's buckets across tables, first-seen order, distinct.

    May be empty when the query collides with nothing; callers score what
    they get (an empty list yields an empty result and precision 0).
    """
    wq = np.asarray(w_hat, dtype=np.float64).reshape(1, -1)
    if wq.shape[1] != index.dim:
        raise DataError(f"query has dim {wq.shape[1]}, index has {index.dim}")
    sigs = _signatures(index.hyperplanes, wq)[:, 0]
    buckets = []
    for tbl in range(index.b):
        hit = index.tables[tbl].get(int(sigs[tbl]))
        if hit is not None:
            buckets.append(hit)
    if not buckets:
        return np.empty(0, dtype=np.int64)
    cat = np.concatenate(buckets)
    _, first = np.unique(cat, return_index=True)
    return cat[np.sort(first)]

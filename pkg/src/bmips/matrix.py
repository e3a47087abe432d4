"""Dense candidate data model, rank semantics, file I/O, synthetic generation.

Candidates are the rows of an n x k float32 matrix. Indices are 0-based
everywhere (candidates j in 0..n-1, dimensions t in 0..k-1). Scoring is done
in float64 on a cached converted copy; storage and file formats stay float32.

Binary matrix format: magic "BMIP", version u32, n u64, k u64, then n*k
little-endian float32 values row-major. Text format: first line "n k", then
n whitespace-separated rows. Query files reuse both formats with n = number
of queries.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

MATRIX_MAGIC = b"BMIP"
MATRIX_FORMAT_VERSION = 1

DISTRIBUTIONS = ("normal", "nonneg-uniform")


class DataError(ValueError):
    """Malformed, inconsistent, or non-finite input data."""


@dataclass(eq=False)
class CandidateMatrix:
    """The n x k candidate set; row j holds candidate j's embedding.

    Immutable after construction. `values` is the float32 storage that file
    formats round-trip bit-exactly; `values_f64` is the float64 copy used for
    exact scoring, materialized once per matrix.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values)
        if arr.ndim != 2:
            raise DataError(f"candidate matrix must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DataError(f"candidate matrix needs n >= 1 and k >= 1, got {arr.shape}")
        arr = np.ascontiguousarray(arr, dtype=np.float32)
        if not np.all(np.isfinite(arr)):
            raise DataError("candidate matrix contains NaN or Inf")
        arr.flags.writeable = False
        self.values = arr

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]

    @cached_property
    def values_f64(self) -> np.ndarray:
        out = self.values.astype(np.float64)
        out.flags.writeable = False
        return out


def as_query(w, k: int) -> np.ndarray:
    """Validate a query vector against dimension k; returns a float64 copy."""
    arr = np.asarray(w, dtype=np.float64).reshape(-1)
    if arr.shape[0] != k:
        raise DataError(f"query has {arr.shape[0]} components, matrix has k={k}")
    if not np.all(np.isfinite(arr)):
        raise DataError("query contains NaN or Inf")
    return arr


def inner_product(matrix: CandidateMatrix, j: int, w) -> float:
    """Score of candidate j: sum_t h[j,t]*w[t], left-to-right in float64.

    The accumulation order is fixed so tests can pin exact values; batch
    scoring (ranking module) uses BLAS and is checked against this.
    """
    if not 0 <= j < matrix.n:
        raise IndexError(f"candidate index {j} out of range [0, {matrix.n})")
    wq = as_query(w, matrix.k)
    row = matrix.values_f64[j]
    acc = 0.0
    for t in range(matrix.k):
        acc += row[t] * wq[t]
    return acc


def implicit_entry(matrix: CandidateMatrix, w, j: int, t: int) -> float:
    """Entry (j,t) of the implicit matrix H*diag(w): h[j,t]*w[t]."""
    if not 0 <= j < matrix.n:
        raise IndexError(f"candidate index {j} out of range [0, {matrix.n})")
    if not 0 <= t < matrix.k:
        raise IndexError(f"dimension index {t} out of range [0, {matrix.k})")
    wq = as_query(w, matrix.k)
    return float(matrix.values_f64[j, t] * wq[t])


def rank_of(x: float, values) -> int:
    """Rank of x in a multiset: the count of elements >= x.

    The maximum has rank 1 (or its multiplicity when tied); an element
    smaller than everything has rank len(values).
    """
    arr = np.asarray(values, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise DataError("rank_of needs a nonempty multiset")
    return int(np.count_nonzero(arr >= x))


def gen_synthetic(n: int, k: int, seed: int, distribution: str = "normal") -> CandidateMatrix:
    """Deterministic synthetic matrix: standard normal or uniform [0,1)."""
    if n < 1 or k < 1:
        raise DataError(f"need n >= 1 and k >= 1, got n={n} k={k}")
    if distribution not in DISTRIBUTIONS:
        raise DataError(f"unknown distribution {distribution!r}, expected one of {DISTRIBUTIONS}")
    rng = np.random.default_rng(seed)
    if distribution == "normal":
        values = rng.standard_normal((n, k), dtype=np.float32)
    else:
        values = rng.random((n, k), dtype=np.float32)
    return CandidateMatrix(values)


# ---------------------------------------------------------------- file I/O

def save_matrix(matrix: CandidateMatrix, path, format: str = "bin") -> None:
    path = Path(path)
    if format == "bin":
        with open(path, "wb") as f:
            f.write(MATRIX_MAGIC)
            f.write(struct.pack("<I", MATRIX_FORMAT_VERSION))
            f.write(struct.pack("<QQ", matrix.n, matrix.k))
            f.write(np.ascontiguousarray(matrix.values, dtype="<f4").tobytes())
    elif format == "txt":
        with open(path, "w") as f:
            f.write(f"{matrix.n} {matrix.k}\n")
            # %.9g round-trips float32 exactly
            np.savetxt(f, matrix.values, fmt="%.9g")
    else:
        raise DataError(f"unknown matrix format {format!r}, expected 'bin' or 'txt'")


def load_matrix(path, format: str | None = None) -> CandidateMatrix:
    """Load a matrix file; format is sniffed from the magic when not given."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"matrix file not found: {path}")
    if format is None:
        with open(path, "rb") as f:
            format = "bin" if f.read(4) == MATRIX_MAGIC else "txt"
    if format == "bin":
        return _load_matrix_bin(path)
    if format == "txt":
        return _load_matrix_txt(path)
    raise DataError(f"unknown matrix format {format!r}, expected 'bin' or 'txt'")


def _load_matrix_bin(path: Path) -> CandidateMatrix:
    with open(path, "rb") as f:
        header = f.read(4 + 4 + 16)
        if len(header) < 24 or header[:4] != MATRIX_MAGIC:
            raise DataError(f"{path}: not a matrix file (bad magic)")
        (version,) = struct.unpack_from("<I", header, 4)
        if version != MATRIX_FORMAT_VERSION:
            raise DataError(f"{path}: unsupported matrix format version {version}")
        n, k = struct.unpack_from("<QQ", header, 8)
        if n < 1 or k < 1:
            raise DataError(f"{path}: invalid header n={n} k={k}")
        payload = np.fromfile(f, dtype="<f4", count=n * k)
    if payload.size != n * k:
        raise DataError(f"{path}: truncated payload, expected {n * k} values got {payload.size}")
    try:
        return CandidateMatrix(payload.reshape(n, k))
    except DataError as e:
        raise DataError(f"{path}: {e}") from e


def _load_matrix_txt(path: Path) -> CandidateMatrix:
    with open(path) as f:
        header = f.readline().split()
        if len(header) != 2:
            raise DataError(f"{path}: text header must be 'n k'")
        try:
            n, k = int(header[0]), int(header[1])
        except ValueError as e:
            raise DataError(f"{path}: text header must be 'n k'") from e
        try:
            body = np.array(f.read().split(), dtype=np.float32)
        except ValueError as e:
            raise DataError(f"{path}: non-numeric value in matrix body") from e
    if body.size != n * k:
        raise DataError(f"{path}: expected {n * k} values, got {body.size}")
    try:
        return CandidateMatrix(body.reshape(n, k))
    except DataError as e:
        raise DataError(f"{path}: {e}") from e

"""Query-independent preprocessing: per-dimension descending-sorted id arrays.

For each dimension t, ``sorted_idx[t]`` lists all candidate ids ordered by
h[:,t] descending, ties broken by ascending id. Reading a row forward visits
candidates in decreasing column value; reading it backward visits them in
increasing column value — the two query-independent orders a conditional
cursor needs.

Index file format: magic "GIDX", version u32, n u64, k u64, then k blocks of
n little-endian u32 candidate ids.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .matrix import CandidateMatrix, DataError

INDEX_MAGIC = b"GIDX"
INDEX_FORMAT_VERSION = 1


@dataclass(eq=False)
class GreedyIndex:
    """k sorted id arrays over one CandidateMatrix; immutable after build."""

    matrix: CandidateMatrix
    sorted_idx: np.ndarray  # (k, n) uint32, row t = ids by h[:,t] desc, ties asc

    @property
    def n(self) -> int:
        return self.matrix.n

    @property
    def k(self) -> int:
        return self.matrix.k


def build_index(matrix: CandidateMatrix) -> GreedyIndex:
    """Sort each column once; O(k n log n) build, O(k n) storage."""
    if matrix.n >= 2**32:
        raise DataError("index stores u32 candidate ids; n must be < 2^32")
    # stable argsort on the negated column = value descending, ties ascending id
    order = np.argsort(-matrix.values, axis=0, kind="stable")
    sorted_idx = np.ascontiguousarray(order.T, dtype=np.uint32)
    sorted_idx.flags.writeable = False
    return GreedyIndex(matrix=matrix, sorted_idx=sorted_idx)


def index_to_bytes(index: GreedyIndex) -> bytes:
    head = INDEX_MAGIC + struct.pack("<I", INDEX_FORMAT_VERSION)
    head += struct.pack("<QQ", index.n, index.k)
    body = np.ascontiguousarray(index.sorted_idx, dtype="<u4").tobytes()
    return head + body


def index_from_bytes(data: bytes, matrix: CandidateMatrix) -> GreedyIndex:
    """Parse and validate: ids must form a permutation per dimension and the
    header must match the companion matrix."""
    if len(data) < 24 or data[:4] != INDEX_MAGIC:
        raise DataError("not an index blob (bad magic)")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != INDEX_FORMAT_VERSION:
        raise DataError(f"unsupported index format version {version}")
    n, k = struct.unpack_from("<QQ", data, 8)
    if n != matrix.n or k != matrix.k:
        raise DataError(
            f"index built for n={n} k={k}, matrix has n={matrix.n} k={matrix.k}")
    expected = 24 + n * k * 4
    if len(data) != expected:
        raise DataError(f"index blob has {len(data)} bytes, expected {expected}")
    sorted_idx = np.frombuffer(data, dtype="<u4", offset=24).reshape(k, n).copy()
    for t in range(k):
        counts = np.bincount(sorted_idx[t], minlength=n)
        if sorted_idx[t].max(initial=0) >= n or not np.all(counts == 1):
            raise DataError(f"index row {t} is not a permutation of 0..n-1")
    sorted_idx.flags.writeable = False
    return GreedyIndex(matrix=matrix, sorted_idx=sorted_idx)


def save_index(index: GreedyIndex, path) -> None:
    Path(path).write_bytes(index_to_bytes(index))


def load_index(path, matrix: CandidateMatrix) -> GreedyIndex:
    path = Path(path)
    if not path.exists():
        raise DataError(f"index file not found: {path}")
    return index_from_bytes(path.read_bytes(), matrix)

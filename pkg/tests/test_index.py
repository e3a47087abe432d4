"""Per-dimension sorted index: construction order and serialization."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bmips import (CandidateMatrix, DataError, build_index, gen_synthetic,
                   index_from_bytes, index_to_bytes, load_index, save_index)

from conftest import TOY_SORTED


class TestBuildIndex:
    def test_toy_rows(self, toy_index):
        np.testing.assert_array_equal(toy_index.sorted_idx, TOY_SORTED)
        assert toy_index.sorted_idx.dtype == np.uint32

    def test_rows_are_descending_permutations(self):
        rng = np.random.default_rng(5)
        m = CandidateMatrix(rng.standard_normal((40, 6)).astype(np.float32))
        idx = build_index(m)
        for t in range(m.k):
            row = idx.sorted_idx[t]
            assert sorted(row.tolist()) == list(range(m.n))
            col = m.values[row, t]
            assert np.all(col[:-1] >= col[1:])

    def test_ties_break_by_ascending_id(self):
        values = np.array([[1.0], [2.0], [1.0], [2.0]], dtype=np.float32)
        idx = build_index(CandidateMatrix(values))
        np.testing.assert_array_equal(idx.sorted_idx[0], [1, 3, 0, 2])

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**31), n=st.integers(1, 64), k=st.integers(1, 8))
    def test_permutation_property(self, seed, n, k):
        rng = np.random.default_rng(seed)
        vals = np.round(rng.standard_normal((n, k)) * 3).astype(np.float32)
        idx = build_index(CandidateMatrix(vals))
        for t in range(k):
            row = idx.sorted_idx[t]
            assert np.array_equal(np.sort(row), np.arange(n))
            col = vals[row, t]
            assert np.all(col[:-1] >= col[1:])
            same = col[:-1] == col[1:]
            assert np.all(row[:-1][same] < row[1:][same])


class TestIndexSerialization:
    def test_round_trip(self, toy_matrix, toy_index):
        blob = index_to_bytes(toy_index)
        back = index_from_bytes(blob, toy_matrix)
        np.testing.assert_array_equal(back.sorted_idx, toy_index.sorted_idx)

    def test_rebuild_is_byte_identical(self):
        m = gen_synthetic(50, 4, seed=8)
        a = index_to_bytes(build_index(m))
        b = index_to_bytes(build_index(m))
        assert a == b

    def test_bad_magic(self, toy_matrix):
        with pytest.raises(DataError):
            index_from_bytes(b"XXXX" + bytes(40), toy_matrix)

    def test_non_permutation_rejected(self, toy_matrix, toy_index):
        blob = bytearray(index_to_bytes(toy_index))
        # Overwrite the first id of the first row with a duplicate of the
        # second id; the row is no longer a permutation.
        off = 4 + 4 + 16
        blob[off:off + 4] = blob[off + 4:off + 8]
        with pytest.raises(DataError):
            index_from_bytes(bytes(blob), toy_matrix)

    def test_wrong_companion_matrix(self, toy_index):
        other = gen_synthetic(9, 2, seed=0)
        with pytest.raises(DataError):
            index_from_bytes(index_to_bytes(toy_index), other)

    def test_file_round_trip(self, tmp_path, toy_matrix, toy_index):
        p = tmp_path / "toy.idx"
        save_index(toy_index, p)
        back = load_index(p, toy_matrix)
        np.testing.assert_array_equal(back.sorted_idx, toy_index.sorted_idx)

    def test_missing_file(self, tmp_path, toy_matrix):
        with pytest.raises(DataError):
            load_index(tmp_path / "absent.idx", toy_matrix)

"""MIPS-to-NNS reductions and the sign-projection hash baseline."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bmips import (CandidateMatrix, DataError, lsh_build, lsh_screen,
                   reduce_A, reduce_B, reduce_query_A, reduce_query_B)
from bmips.nns import _signatures

from conftest import random_instance


def ip_order_matches_distance_order(matrix, reduced, w, w_hat, rel_tol=1e-6):
    """Distance-ascending order must be inner-product-descending up to ties."""
    ips = matrix.values_f64 @ np.asarray(w, dtype=np.float64)
    dists = np.linalg.norm(reduced.values - w_hat[None, :], axis=1)
    along = ips[np.argsort(dists, kind="stable")]
    for a, b in zip(along, along[1:]):
        if b > a and (b - a) > rel_tol * max(abs(a), abs(b), 1.0):
            return False
    return True


class TestReductionA:
    def test_norms_equalized_and_query_padded(self):
        rng = np.random.default_rng(20)
        matrix, w = random_instance(rng, n_max=40, k_max=6)
        red = reduce_A(matrix)
        norms = np.linalg.norm(red.values, axis=1)
        np.testing.assert_allclose(norms, norms[0], rtol=1e-9)
        assert red.values.shape == (matrix.n, matrix.k + 1)
        w_hat = reduce_query_A(w)
        assert w_hat.shape == (matrix.k + 1,)
        assert w_hat[-1] == 0.0
        np.testing.assert_array_equal(w_hat[:-1], np.asarray(w, dtype=np.float64))

    def test_augmented_coordinate_is_norm_complement(self):
        rng = np.random.default_rng(21)
        matrix, _ = random_instance(rng, n_max=20, k_max=4)
        red = reduce_A(matrix)
        sq = np.einsum("ij,ij->i", matrix.values_f64, matrix.values_f64)
        np.testing.assert_allclose(red.values[:, -1] ** 2, red.M - sq,
                                   rtol=1e-9, atol=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**31))
    def test_order_preservation(self, seed):
        rng = np.random.default_rng(seed)
        matrix, w = random_instance(rng, n_max=48, k_max=6)
        red = reduce_A(matrix)
        assert ip_order_matches_distance_order(matrix, red, w, reduce_query_A(w))


class TestReductionB:
    def test_worked_single_row(self):
        # one row [0.6, 0] with U equal to its norm: scale is 1 and the
        # appended coordinates are 0.5 - 0.6^2 = 0.14 and 0.5 - 0.6^4 = 0.3704
        matrix = CandidateMatrix(np.array([[0.6, 0.0]], dtype=np.float32))
        red = reduce_B(matrix, U=0.6, kbar=2)
        np.testing.assert_allclose(red.values[0, :2], [0.6, 0.0], rtol=1e-7)
        np.testing.assert_allclose(red.values[0, 2:], [0.14, 0.3704], rtol=1e-6)

    @pytest.mark.parametrize("kbar", [1, 2, 3])
    def test_norm_concentration_bound(self, kbar):
        rng = np.random.default_rng(22)
        matrix = CandidateMatrix(rng.standard_normal((60, 5)).astype(np.float32))
        red = reduce_B(matrix, U=0.9, kbar=kbar)
        sq = np.einsum("ij,ij->i", red.values, red.values)
        bound = 0.9 ** (2 ** (kbar + 1))
        assert np.abs(sq - kbar / 4.0).max() <= bound + 1e-6

    def test_kbar_zero_is_identity(self):
        rng = np.random.default_rng(23)
        matrix, _ = random_instance(rng, n_max=10, k_max=3)
        red = reduce_B(matrix, U=0.5, kbar=0)
        np.testing.assert_array_equal(red.values, matrix.values_f64)

    def test_query_padding_is_unscaled(self):
        w = np.array([3.0, -4.0])
        w_hat = reduce_query_B(w, 3)
        np.testing.assert_array_equal(w_hat, [3.0, -4.0, 0.0, 0.0, 0.0])

    def test_rejects_bad_params(self, toy_matrix):
        with pytest.raises(DataError):
            reduce_B(toy_matrix, U=1.0, kbar=2)
        with pytest.raises(DataError):
            reduce_B(toy_matrix, U=0.5, kbar=-1)

    def test_scaled_norms_capped_by_U(self):
        rng = np.random.default_rng(24)
        matrix, _ = random_instance(rng, n_max=30, k_max=4)
        red = reduce_B(matrix, U=0.83, kbar=3)
        scaled = matrix.values_f64 * red.scale
        assert np.linalg.norm(scaled, axis=1).max() <= 0.83 + 1e-9


class TestLsh:
    def setup_method(self):
        rng = np.random.default_rng(30)
        self.matrix = CandidateMatrix(rng.standard_normal((80, 6)).astype(np.float32))
        self.red = reduce_A(self.matrix)
        self.w = rng.standard_normal(6)
        self.w_hat = reduce_query_A(self.w)

    def test_deterministic_per_seed(self):
        a = lsh_build(self.red, a=6, b=4, seed=5)
        b = lsh_build(self.red, a=6, b=4, seed=5)
        np.testing.assert_array_equal(a.hyperplanes, b.hyperplanes)
        np.testing.assert_array_equal(lsh_screen(a, self.w_hat),
                                      lsh_screen(b, self.w_hat))
        c = lsh_build(self.red, a=6, b=4, seed=6)
        assert not np.array_equal(a.hyperplanes, c.hyperplanes)

    def test_tables_partition_all_ids(self):
        idx = lsh_build(self.red, a=5, b=3, seed=1)
        for table in idx.tables:
            members = np.concatenate(list(table.values()))
            assert np.array_equal(np.sort(members), np.arange(80))
            for bucket in table.values():
                assert np.all(bucket[:-1] < bucket[1:])  # id-ascending

    def test_candidates_share_a_bucket_and_noncandidates_do_not(self):
        # independent route: recompute signatures and check membership
        idx = lsh_build(self.red, a=8, b=8, seed=2)
        cand = set(lsh_screen(idx, self.w_hat).tolist())
        q_sigs = _signatures(idx.hyperplanes, self.w_hat.reshape(1, -1))[:, 0]
        c_sigs = _signatures(idx.hyperplanes, self.red.values)
        for j in range(80):
            shares = bool(np.any(c_sigs[:, j] == q_sigs))
            assert shares == (j in cand), j

    def test_screen_output_distinct_first_seen(self):
        idx = lsh_build(self.red, a=3, b=6, seed=3)
        got = lsh_screen(idx, self.w_hat)
        assert np.unique(got).shape[0] == got.shape[0]
        # first-seen order: walking tables in order reproduces the list
        seen, expected = set(), []
        q_sigs = _signatures(idx.hyperplanes, self.w_hat.reshape(1, -1))[:, 0]
        for tbl in range(idx.b):
            hit = idx.tables[tbl].get(int(q_sigs[tbl]))
            if hit is None:
                continue
            for j in hit.tolist():
                if j not in seen:
                    seen.add(j)
                    expected.append(j)
        assert got.tolist() == expected

    def test_wider_or_means_no_fewer_candidates(self):
        small = lsh_build(self.red, a=8, b=2, seed=4)
        large = lsh_build(self.red, a=8, b=12, seed=4)
        got_small = lsh_screen(small, self.w_hat)
        got_large = lsh_screen(large, self.w_hat)
        assert set(got_small.tolist()) <= set(got_large.tolist())

    def test_rejects_bad_params(self):
        with pytest.raises(DataError):
            lsh_build(self.red, a=0, b=2, seed=0)
        with pytest.raises(DataError):
            lsh_build(self.red, a=65, b=2, seed=0)
        with pytest.raises(DataError):
            lsh_build(self.red, a=4, b=0, seed=0)

    def test_dim_mismatch(self):
        idx = lsh_build(self.red, a=4, b=2, seed=0)
        with pytest.raises(DataError):
            lsh_screen(idx, np.zeros(3))

"""Weight-proportional sampling: draw distribution and screen behavior."""

import numpy as np
import pytest

from bmips import CandidateMatrix, DataError, sample_screen, sampler_build
from bmips.sampling import sample_pairs


@pytest.fixture
def small():
    rng = np.random.default_rng(40)
    matrix = CandidateMatrix(rng.standard_normal((12, 3)).astype(np.float32))
    return matrix, sampler_build(matrix)


class TestSamplerBuild:
    def test_shapes(self, small):
        matrix, sidx = small
        assert sidx.prob.shape == (3, 12)
        assert sidx.alias.shape == (3, 12)
        assert sidx.col_weight.shape == (3,)
        assert (sidx.n, sidx.k) == (12, 3)

    def test_all_zero_matrix_rejected(self):
        with pytest.raises(DataError):
            sampler_build(CandidateMatrix(np.zeros((4, 2), dtype=np.float32)))

    def test_usable_flags(self):
        values = np.zeros((4, 2), dtype=np.float32)
        values[:, 1] = 1.0
        sidx = sampler_build(CandidateMatrix(values))
        assert sidx.usable.tolist() == [False, True]


class TestSamplePairs:
    def test_empirical_joint_distribution(self, small):
        matrix, sidx = small
        rng = np.random.default_rng(41)
        w = rng.standard_normal(3)
        t_arr, j_arr = sample_pairs(sidx, w, 200_000, np.random.default_rng(42))
        mass = np.abs(matrix.values_f64 * w)
        p_true = (mass / mass.sum()).T  # (k, n)
        counts = np.zeros((3, 12))
        np.add.at(counts, (t_arr, j_arr), 1)
        p_emp = counts / counts.sum()
        assert np.abs(p_emp - p_true).max() < 0.004

    def test_zero_weight_dimension_never_drawn(self, small):
        _, sidx = small
        w = np.array([1.0, 0.0, -2.0])
        t_arr, _ = sample_pairs(sidx, w, 20_000, np.random.default_rng(1))
        assert not np.any(t_arr == 1)

    def test_zero_mass_query_gives_empty(self, small):
        _, sidx = small
        t_arr, j_arr = sample_pairs(sidx, np.zeros(3), 100, np.random.default_rng(0))
        assert t_arr.shape == (0,) and j_arr.shape == (0,)

    def test_bad_sample_count(self, small):
        _, sidx = small
        with pytest.raises(DataError):
            sample_pairs(sidx, np.ones(3), 0, np.random.default_rng(0))


class TestSampleScreen:
    def test_deterministic_per_seed(self, small):
        _, sidx = small
        w = np.array([0.5, -1.0, 2.0])
        a = sample_screen(sidx, w, None, 6, seed=9)
        b = sample_screen(sidx, w, None, 6, seed=9)
        np.testing.assert_array_equal(a, b)

    def test_count_ranking_matches_recount(self, small):
        # dual route: reproduce the draws and rank counts independently
        _, sidx = small
        w = np.array([0.5, -1.0, 2.0])
        B = 5
        got = sample_screen(sidx, w, None, B, seed=13)
        _, j_arr = sample_pairs(sidx, w, B, np.random.default_rng(13))
        uniq, counts = np.unique(j_arr, return_counts=True)
        expected = uniq[np.argsort(-counts, kind="stable")][:B]
        np.testing.assert_array_equal(got, expected)

    def test_explicit_sample_count(self, small):
        _, sidx = small
        w = np.array([0.5, -1.0, 2.0])
        got = sample_screen(sidx, w, 5000, 12, seed=3)
        assert got.shape[0] <= 12
        assert np.unique(got).shape[0] == got.shape[0]

    def test_heavy_item_surfaces_first(self):
        values = np.ones((30, 2), dtype=np.float32) * 0.01
        values[17] = [50.0, 50.0]  # dominates the |z| mass
        sidx = sampler_build(CandidateMatrix(values))
        got = sample_screen(sidx, np.array([1.0, 1.0]), 2000, 4, seed=0)
        assert got[0] == 17

    def test_zero_mass_query(self, small):
        _, sidx = small
        got = sample_screen(sidx, np.zeros(3), None, 4, seed=0)
        assert got.shape == (0,)
        assert got.dtype == np.int64

    def test_bad_budget(self, small):
        _, sidx = small
        with pytest.raises(DataError):
            sample_screen(sidx, np.ones(3), None, 0, seed=0)

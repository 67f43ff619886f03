import numpy as np
import pytest
from hypothesis import given, settings

from maple_sim.csr import csr_from_coo, csr_from_triplets, generate_synthetic, identity, matrices_equal, to_dense
from maple_sim.errors import BoundsError, ShapeError
from maple_sim.kernel import (
    SparseRowAccumulator,
    count_products,
    dense_matmul_oracle,
    dense_pattern_oracle,
    derive_j_indices,
    derive_k_indices,
    row_product,
    spgemm_reference,
)

from helpers import expected_products, multipliable_pairs, random_signed


class TestIndexDerivation:
    def test_k_running_example(self, running_example):
        assert derive_k_indices(running_example, 0) == [1, 2]

    def test_k_empty_row(self):
        assert derive_k_indices(csr_from_triplets([], 2, 2), 1) == []

    def test_k_small_pair(self, small_pair):
        assert derive_k_indices(small_pair[0], 0) == [0, 2]

    def test_k_bounds(self, running_example):
        with pytest.raises(BoundsError):
            derive_k_indices(running_example, 4)

    def test_j_small_pair(self, small_pair):
        assert derive_j_indices(*small_pair, 0) == [(0, [0, 2]), (2, [2])]

    def test_j_empty_a_row(self, small_pair):
        assert derive_j_indices(*small_pair, 1) == []

    def test_j_keeps_empty_b_row(self):
        A = csr_from_triplets([(0, 1, 1.0)], 1, 2)
        B = csr_from_triplets([(0, 0, 1.0)], 2, 2)
        assert derive_j_indices(A, B, 0) == [(1, [])]

    def test_j_shape(self):
        with pytest.raises(ShapeError):
            derive_j_indices(identity(2), identity(3), 0)


class TestRowProduct:
    def test_small_pair_values(self, small_pair):
        # C[0,0] = 1*3; C[0,2] = 1*4 + 2*5
        acc = row_product(*small_pair, 0, SparseRowAccumulator(3))
        assert acc.slots[0] == 3.0
        assert acc.slots[2] == 14.0
        assert sorted(acc.touched) == [0, 2]
        assert to_dense(spgemm_reference(*small_pair)).data[0].tolist() == dense_matmul_oracle(
            to_dense(small_pair[0]), to_dense(small_pair[1])).data[0].tolist()

    def test_empty_row_untouched(self, small_pair):
        acc = row_product(*small_pair, 1, SparseRowAccumulator(3))
        assert acc.is_clear() and acc.slots == [0.0, 0.0, 0.0]

    def test_identity(self):
        B = csr_from_triplets([(0, 0, 7.0)], 1, 1)
        assert row_product(identity(1), B, 0, SparseRowAccumulator(1)).slots == [7.0]

    def test_width_mismatch(self, small_pair):
        with pytest.raises(ShapeError):
            row_product(*small_pair, 0, SparseRowAccumulator(2))

    def test_drain_sorted_and_clears(self):
        acc = SparseRowAccumulator(5)
        for j, v in [(4, 1.0), (1, 2.0), (4, 3.0)]:
            acc.accumulate(j, v)
        assert acc.drain() == ([1, 4], [2.0, 4.0])
        assert acc.is_clear() and not any(acc.occupied)

    @settings(max_examples=100, deadline=None)
    @given(multipliable_pairs())
    def test_visits_match_index_derivation(self, pair):
        A, B = pair
        for i in range(A.rows):
            trace = []
            row_product(A, B, i, SparseRowAccumulator(B.cols), trace)
            expected = [(k, j) for k, js in derive_j_indices(A, B, i) for j in js]
            assert sorted(trace) == sorted(expected)
            touched = {j for _, j in expected}
            assert len(touched) >= spgemm_reference(A, B).row_nnz(i)


class TestDenseOracle:
    def test_zero(self):
        out = dense_matmul_oracle(np.zeros((2, 3)), np.ones((3, 2)))
        assert not out.data.any()

    def test_scalar(self):
        assert dense_matmul_oracle([[2.0]], [[3.0]]).data.tolist() == [[6.0]]

    def test_2x2(self):
        out = dense_matmul_oracle([[1, 2], [3, 4]], [[5, 6], [7, 8]])
        assert out.data.tolist() == [[19.0, 22.0], [43.0, 50.0]]

    def test_shape(self):
        with pytest.raises(ShapeError):
            dense_matmul_oracle(np.ones((2, 3)), np.ones((2, 3)))


class TestSpgemmReference:
    def test_identity_left(self):
        B = generate_synthetic(3, 5, 0.4, seed=2)
        assert matrices_equal(spgemm_reference(identity(3), B), B, 0.0)

    def test_running_example_squared(self, running_example):
        C = spgemm_reference(running_example, running_example)
        oracle = dense_matmul_oracle(to_dense(running_example), to_dense(running_example)).data
        np.testing.assert_allclose(to_dense(C).data, oracle, rtol=1e-10, atol=0)
        assert np.array_equal(to_dense(C).data != 0, dense_pattern_oracle(to_dense(running_example), to_dense(running_example)))

    def test_exact_cancellation_kept(self):
        A = csr_from_triplets([(0, 0, 1.0), (0, 1, 1.0)], 1, 2)
        B = csr_from_triplets([(0, 0, 2.0), (1, 0, -2.0)], 2, 1)
        C = spgemm_reference(A, B)
        assert C.nnz == 1 and C.value.tolist() == [0.0]
        assert matrices_equal(C, csr_from_triplets([], 1, 1), 0.0)

    def test_shape(self):
        with pytest.raises(ShapeError):
            spgemm_reference(identity(2), identity(3))

    def test_random_sweep(self):
        rng = np.random.default_rng(11)
        for trial in range(100):
            m, k, n = rng.integers(1, 65, size=3)
            A = random_signed(m, k, 0.1, 2 * trial)
            B = random_signed(k, n, 0.1, 2 * trial + 1)
            C = spgemm_reference(A, B)
            dense = dense_matmul_oracle(to_dense(A), to_dense(B)).data
            pattern = dense_pattern_oracle(to_dense(A), to_dense(B))
            i, j = np.nonzero(pattern)
            oracle = csr_from_coo(i, j, dense[i, j], m, n)
            assert matrices_equal(C, oracle, 1e-10)
            assert C.nnz == pattern.sum()

    @settings(max_examples=100, deadline=None)
    @given(multipliable_pairs())
    def test_work_count(self, pair):
        A, B = pair
        trace = []
        acc = SparseRowAccumulator(B.cols)
        for i in range(A.rows):
            row_product(A, B, i, acc, trace)
            acc.clear()
        assert len(trace) == expected_products(A, B) == count_products(A, B)

    @settings(max_examples=100, deadline=None)
    @given(multipliable_pairs())
    def test_oracle_equivalence(self, pair):
        A, B = pair
        C = spgemm_reference(A, B)
        dense = dense_matmul_oracle(to_dense(A), to_dense(B)).data
        np.testing.assert_allclose(to_dense(C).data, dense, rtol=1e-10, atol=1e-12)
        stored = np.zeros(C.shape, dtype=bool)
        stored[np.repeat(np.arange(C.rows), np.diff(C.row_ptr)), C.col_id] = True
        assert np.array_equal(stored, dense_pattern_oracle(to_dense(A), to_dense(B)))

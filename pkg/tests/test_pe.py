import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maple_sim.csr import csr_from_triplets, matrices_equal
from maple_sim.errors import BoundsError, CapacityError, ShapeError
from maple_sim.events import EventCounts, EventKind
from maple_sim.kernel import derive_j_indices, spgemm_reference
from maple_sim.pe import (
    MaplePeState,
    drain_psb,
    intersect_rows,
    load_row_buffers,
    process_row,
    schedule_and_execute,
)

from helpers import min_contiguous_schedule, multipliable_pairs


def pe_for(B, P=4, **kw):
    return MaplePeState(P, B.cols, **kw)


class TestIntersect:
    def test_both_nonempty(self, small_pair):
        ev = EventCounts()
        assert intersect_rows([0, 2], small_pair[1], ev) == [0, 2]
        assert ev[EventKind.INTERSECTION] == 2

    def test_empty_b_row(self, small_pair):
        ev = EventCounts()
        assert intersect_rows([1], small_pair[1], ev) == []
        assert ev[EventKind.INTERSECTION] == 1

    def test_vacuous(self, small_pair):
        ev = EventCounts()
        assert intersect_rows([], small_pair[1], ev) == []
        assert ev.total() == 0

    def test_bounds(self, small_pair):
        with pytest.raises(BoundsError):
            intersect_rows([3], small_pair[1])


class TestLoad:
    def test_small_pair(self, small_pair):
        A, B = small_pair
        pe = load_row_buffers(pe_for(B), A, B, 0)
        assert [(e.k_prime, e.reps) for e in pe.arb] == [(0, 2), (2, 1)]
        assert [(e.k_prime, e.j_prime, e.value) for e in pe.brb] == [(0, 0, 3.0), (0, 2, 4.0), (2, 2, 5.0)]
        assert pe.trace[EventKind.L1_MAC] == 5
        assert pe.trace[EventKind.COMPRESS_DECOMPRESS] == 3
        assert pe.trace[EventKind.INTERSECTION] == 2

    def test_empty_row(self, small_pair):
        A, B = small_pair
        pe = load_row_buffers(pe_for(B), A, B, 1)
        assert not pe.arb and not pe.brb
        assert sum(pe.trace[k] for k in (EventKind.L0_MAC, EventKind.L1_MAC, EventKind.PE_MAC, EventKind.L2_MAC)) == 0

    def test_one_by_four(self):
        A = csr_from_triplets([(0, 1, 2.0)], 1, 2)
        B = csr_from_triplets([(1, j, 1.0 + j) for j in range(4)], 2, 4)
        pe = load_row_buffers(pe_for(B), A, B, 0)
        assert [(e.k_prime, e.reps) for e in pe.arb] == [(1, 4)]
        assert len(pe.brb) == 4

    def test_capacity(self, small_pair):
        A, B = small_pair
        with pytest.raises(CapacityError):
            load_row_buffers(pe_for(B, brb_capacity=2), A, B, 0)
        with pytest.raises(CapacityError):
            load_row_buffers(pe_for(B, arb_capacity=1), A, B, 0)

    def test_must_be_idle(self, small_pair):
        A, B = small_pair
        pe = load_row_buffers(pe_for(B), A, B, 0)
        with pytest.raises(RuntimeError):
            load_row_buffers(pe, A, B, 0)

    def test_width_mismatch(self, small_pair):
        A, B = small_pair
        with pytest.raises(ShapeError):
            load_row_buffers(MaplePeState(2, 5), A, B, 0)


class TestExecute:
    def test_small_pair(self, small_pair):
        A, B = small_pair
        pe = schedule_and_execute(load_row_buffers(pe_for(B, P=4), A, B, 0))
        assert pe.psb[0].value == 3.0
        assert pe.psb[2].value == 4.0 + 10.0
        assert pe.trace[EventKind.MAC_OP] == 3
        assert pe.trace[EventKind.L0_MAC] == 3
        # (j0, j2) issue together; the second j2 product waits a cycle
        assert pe.cycle == 2 == min_contiguous_schedule([0, 2, 2], 4)

    def test_distinct_targets(self):
        A = csr_from_triplets([(0, 0, 1.0), (0, 1, 1.0)], 1, 2)
        B = csr_from_triplets([(0, j, 1.0) for j in range(4)] + [(1, j, 1.0) for j in range(4, 8)], 2, 8)
        pe = schedule_and_execute(load_row_buffers(pe_for(B, P=4), A, B, 0))
        assert pe.trace[EventKind.MAC_OP] == 8
        assert pe.cycle == 2

    def test_single_product(self):
        A = csr_from_triplets([(0, 0, 2.0)], 1, 1)
        B = csr_from_triplets([(0, 0, 3.0)], 1, 1)
        pe = schedule_and_execute(load_row_buffers(pe_for(B, P=1), A, B, 0))
        assert pe.cycle == 1 and pe.psb[0].value == 6.0

    def test_empty_buffers_noop(self):
        pe = schedule_and_execute(MaplePeState(4, 3))
        assert pe.cycle == 0 and pe.trace.total() == 0


class TestDrain:
    def test_small_pair(self, small_pair):
        A, B = small_pair
        pe = schedule_and_execute(load_row_buffers(pe_for(B), A, B, 0))
        (vals, cols), pe = drain_psb(pe)
        assert (vals, cols) == ([3.0, 14.0], [0, 2])
        assert not any(r.occupied for r in pe.psb)
        assert pe.idle

    def test_untouched(self):
        (vals, cols), pe = drain_psb(MaplePeState(2, 4))
        assert vals == [] and cols == [] and pe.trace.total() == 0

    def test_cancellation_slot_emitted(self):
        A = csr_from_triplets([(0, 0, 1.0), (0, 1, 1.0)], 1, 2)
        B = csr_from_triplets([(0, 0, 2.0), (1, 0, -2.0)], 2, 1)
        pe = schedule_and_execute(load_row_buffers(pe_for(B), A, B, 0))
        (vals, cols), _ = drain_psb(pe)
        assert (vals, cols) == ([0.0], [0])

    def test_events(self, small_pair):
        A, B = small_pair
        pe = pe_for(B)
        process_row(pe, A, B, 0)
        # 5 operand loads + 2 result writebacks
        assert pe.trace[EventKind.L1_MAC] == 7
        assert pe.trace.tagged(EventKind.L1_MAC, "OUT") == 2
        assert pe.trace[EventKind.COMPRESS_DECOMPRESS] == 4


def run_rows(A, B, P):
    pe = MaplePeState(P, B.cols, record_products=True)
    rows, cycles = [], []
    for i in range(A.rows):
        before = len(pe.products)
        vals, cols, c = process_row(pe, A, B, i)
        rows.append((vals, cols, pe.products[before:], c))
    return pe, rows


@settings(max_examples=100, deadline=None)
@given(multipliable_pairs(), st.integers(1, 8))
def test_functional_equivalence(pair, P):
    A, B = pair
    C = spgemm_reference(A, B)
    _, rows = run_rows(A, B, P)
    for i, (vals, cols, _, _) in enumerate(rows):
        ref_cols, ref_vals = C.row(i)
        assert cols == ref_cols.tolist()
        np.testing.assert_allclose(vals, ref_vals, rtol=1e-10, atol=0)


@settings(max_examples=100, deadline=None)
@given(multipliable_pairs(), st.integers(1, 8))
def test_product_multiset_and_mac_count(pair, P):
    A, B = pair
    pe, rows = run_rows(A, B, P)
    total = 0
    for i, (_, _, products, _) in enumerate(rows):
        expected = [(k, j) for k, js in derive_j_indices(A, B, i) if js for j in js]
        assert sorted(products) == sorted(expected)
        total += len(products)
    assert pe.trace[EventKind.MAC_OP] == total


@settings(max_examples=100, deadline=None)
@given(multipliable_pairs(), st.integers(1, 6))
def test_cycle_bounds_and_monotonic(pair, p):
    A, B = pair
    _, narrow = run_rows(A, B, p)
    _, wide = run_rows(A, B, 2 * p)
    for (_, _, products, c_narrow), (_, _, _, c_wide) in zip(narrow, wide):
        n = len(products)
        assert c_narrow >= math.ceil(n / p)
        if len({j for _, j in products}) == n:
            assert c_narrow == math.ceil(n / p)
        assert c_wide <= c_narrow


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 4), max_size=10), st.integers(1, 5))
def test_greedy_matches_brute_force_schedule(targets, P):
    # one A nonzero per target so the product stream is exactly ``targets``
    K = len(targets)
    A = csr_from_triplets([(0, k, 1.0) for k in range(K)], 1, max(K, 1))
    B = csr_from_triplets([(k, j, 1.0) for k, j in enumerate(targets)], max(K, 1), 5)
    pe = schedule_and_execute(load_row_buffers(MaplePeState(P, 5), A, B, 0))
    assert pe.cycle == min_contiguous_schedule(targets, P)

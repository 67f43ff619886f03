"""Independent oracles and generators shared by the test modules."""

import itertools
import math

import numpy as np
from hypothesis import strategies as st

from maple_sim.csr import csr_from_coo, generate_synthetic


def min_contiguous_schedule(targets, mac_count):
    """Fewest in-order issue groups, found by trying every set of cut points.

    A group is legal when it has at most ``mac_count`` products and no two
    target the same register.
    """
    n = len(targets)
    if n == 0:
        return 0
    best = math.inf
    for cuts in itertools.product((False, True), repeat=n - 1):
        groups, start = [], 0
        for pos, cut in enumerate(cuts, 1):
            if cut:
                groups.append(targets[start:pos])
                start = pos
        groups.append(targets[start:])
        if all(len(g) <= mac_count and len(set(g)) == len(g) for g in groups):
            best = min(best, len(groups))
    return best


def expected_products(A, B):
    """Sum over rows and stored k' of nnz(B[k', :]), by plain iteration."""
    total = 0
    for i in range(A.rows):
        for p in range(A.row_ptr[i], A.row_ptr[i + 1]):
            k = A.col_id[p]
            total += int(B.row_ptr[k + 1] - B.row_ptr[k])
    return total


def random_signed(rows, cols, density, seed):
    """Synthetic matrix with random signs so cancellations can happen."""
    m = generate_synthetic(rows, cols, density, seed)
    signs = np.random.default_rng(seed + 10_000).choice([-1.0, 1.0], size=m.nnz)
    rr = np.repeat(np.arange(rows), np.diff(m.row_ptr))
    return csr_from_coo(rr, m.col_id, m.value * signs, rows, cols)


@st.composite
def csr_matrices(draw, max_dim=10, rows=None, cols=None, values=None):
    rows = draw(st.integers(1, max_dim)) if rows is None else rows
    cols = draw(st.integers(1, max_dim)) if cols is None else cols
    values = values or st.sampled_from([-2.0, -1.0, 0.5, 1.0, 3.0])
    cells = draw(st.sets(st.tuples(st.integers(0, rows - 1), st.integers(0, cols - 1)), max_size=rows * cols))
    cells = sorted(cells)
    vals = [draw(values) for _ in cells]
    i = [c[0] for c in cells]
    j = [c[1] for c in cells]
    return csr_from_coo(i, j, vals, rows, cols)


@st.composite
def multipliable_pairs(draw, max_dim=10):
    m, k, n = (draw(st.integers(1, max_dim)) for _ in range(3))
    return draw(csr_matrices(rows=m, cols=k)), draw(csr_matrices(rows=k, cols=n))

"""Gustavson row-wise product on CSR operands, and a dense oracle.

For output row ``i`` the nonzero columns ``k'`` of ``A[i, :]`` select rows of
``B``; every stored ``B[k', j']`` is scaled by ``A[i, k']`` and accumulated
into column ``j'`` of the output row.  Accumulation order is ascending ``k'``
then ascending ``j'``, which fixes floating-point results.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .csr import CsrMatrix, DenseMatrix, DENSE_LIMIT
from .errors import BoundsError, CapacityError, ShapeError


class SparseRowAccumulator:
    """Dense workspace of width ``N`` that remembers which slots were written.

    ``touched`` lists occupied columns in first-write order; :meth:`drain`
    returns them sorted.
    """

    __slots__ = ("width", "slots", "occupied", "touched")

    def __init__(self, width: int):
        self.width = width
        self.slots = [0.0] * width
        self.occupied = [False] * width
        self.touched: list[int] = []

    def accumulate(self, j: int, v: float) -> None:
        if self.occupied[j]:
            self.slots[j] += v
        else:
            self.occupied[j] = True
            self.slots[j] = v
            self.touched.append(j)

    def is_clear(self) -> bool:
        return not self.touched

    def clear(self) -> None:
        for j in self.touched:
            self.slots[j] = 0.0
            self.occupied[j] = False
        self.touched = []

    def drain(self) -> tuple[list[int], list[float]]:
        """Return ``(cols, values)`` in ascending column order and clear."""
        cols = sorted(self.touched)
        vals = [self.slots[j] for j in cols]
        self.clear()
        return cols, vals


def _check_row(A: CsrMatrix, i: int) -> None:
    if not 0 <= i < A.rows:
        raise BoundsError(f"row {i} outside [0, {A.rows})")


def _check_inner(A: CsrMatrix, B: CsrMatrix) -> None:
    if A.cols != B.rows:
        raise ShapeError(f"cannot multiply {A.rows}x{A.cols} by {B.rows}x{B.cols}")


def derive_k_indices(A: CsrMatrix, i: int) -> list[int]:
    _check_row(A, i)
    return A.row(i)[0].tolist()


def derive_j_indices(A: CsrMatrix, B: CsrMatrix, i: int) -> list[tuple[int, list[int]]]:
    """Pair each ``k'`` of row ``i`` with the column indices of ``B[k', :]``.

    Empty ``B`` rows are kept as ``(k', [])``; filtering them is the PE's job.
    """
    _check_inner(A, B)
    return [(k, B.row(k)[0].tolist()) for k in derive_k_indices(A, i)]


def row_product(
    A: CsrMatrix,
    B: CsrMatrix,
    i: int,
    acc: SparseRowAccumulator,
    trace: Optional[list] = None,
) -> SparseRowAccumulator:
    """Accumulate ``A[i, k'] * B[k', j']`` for every stored pair into ``acc``.

    If ``trace`` is given, each visited ``(k', j')`` is appended to it.
    """
    _check_inner(A, B)
    _check_row(A, i)
    if acc.width != B.cols:
        raise ShapeError(f"accumulator width {acc.width} != B.cols {B.cols}")
    b_ptr, b_col, b_val = B.row_ptr, B.col_id, B.value
    ks, avals = A.row(i)
    for k, a in zip(ks.tolist(), avals.tolist()):
        lo, hi = b_ptr[k], b_ptr[k + 1]
        for j, b in zip(b_col[lo:hi].tolist(), b_val[lo:hi].tolist()):
            acc.accumulate(j, a * b)
            if trace is not None:
                trace.append((k, j))
    return acc


def spgemm_reference(A: CsrMatrix, B: CsrMatrix) -> CsrMatrix:
    """C = A @ B by Gustavson's algorithm, keeping exact cancellations."""
    _check_inner(A, B)
    acc = SparseRowAccumulator(B.cols)
    row_ptr = [0]
    col_id: list[int] = []
    value: list[float] = []
    for i in range(A.rows):
        row_product(A, B, i, acc)
        cols, vals = acc.drain()
        col_id.extend(cols)
        value.extend(vals)
        row_ptr.append(len(col_id))
    return CsrMatrix(A.rows, B.cols, value, col_id, row_ptr)


def count_products(A: CsrMatrix, B: CsrMatrix) -> int:
    """Total scalar multiplications of the row-wise product: sum of nnz(B[k', :])."""
    _check_inner(A, B)
    return int(np.diff(B.row_ptr)[A.col_id].sum())


def _as_array(m) -> np.ndarray:
    return m.data if isinstance(m, DenseMatrix) else np.atleast_2d(np.asarray(m, dtype=float))


def dense_matmul_oracle(A, B) -> DenseMatrix:
    """Textbook product accumulated over ``k = 0 .. K-1`` in index order.

    Independent of the CSR path; each step adds the rank-one term
    ``A[:, k] * B[k, :]`` to every output entry at once.
    """
    a, b = _as_array(A), _as_array(B)
    (m, K), (K2, n) = a.shape, b.shape
    if K != K2:
        raise ShapeError(f"cannot multiply {m}x{K} by {K2}x{n}")
    if max(m * K, K * n, m * n) > DENSE_LIMIT:
        raise CapacityError("operands exceed dense oracle limit")
    c = np.zeros((m, n))
    for k in range(K):
        c += np.outer(a[:, k], b[k, :])
    return DenseMatrix(m, n, c)


def dense_pattern_oracle(A, B) -> np.ndarray:
    """Boolean structural pattern of A @ B, counting exact cancellations as present."""
    a, b = _as_array(A) != 0, _as_array(B) != 0
    return (a.astype(np.int64) @ b.astype(np.int64)) > 0

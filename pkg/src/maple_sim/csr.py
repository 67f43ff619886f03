"""Compressed sparse row matrices: construction, validation, I/O and synthesis.

A :class:`CsrMatrix` is the three-vector representation (``value``,
``col_id``, ``row_ptr``) used by every other module.  Matrices are immutable
once built; the arrays are flagged read-only.

Matrix Market files are 1-based on disk and 0-based in memory.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, TextIO, Union

import numpy as np

from .errors import BoundsError, CapacityError, IoError, ParseError, UnsupportedError

#: Largest rows * cols product that may be materialised densely.
DENSE_LIMIT = 10**8

#: Entries with magnitude at or below this are ignored by :func:`matrices_equal`.
ZERO_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class CsrMatrix:
    rows: int
    cols: int
    value: np.ndarray
    col_id: np.ndarray
    row_ptr: np.ndarray

    def __post_init__(self):
        for name, dtype in (("value", np.float64), ("col_id", np.int64), ("row_ptr", np.int64)):
            arr = np.array(getattr(self, name), dtype=dtype)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "rows", int(self.rows))
        object.__setattr__(self, "cols", int(self.cols))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        return len(self.value)

    def row_nnz(self, i: int) -> int:
        """Number of stored entries in row ``i`` (adjacent ``row_ptr`` difference)."""
        return int(self.row_ptr[i + 1] - self.row_ptr[i])

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(col_id, value)`` slices of row ``i``."""
        lo, hi = self.row_ptr[i], self.row_ptr[i + 1]
        return self.col_id[lo:hi], self.value[lo:hi]

    def __repr__(self) -> str:
        return f"CsrMatrix(rows={self.rows}, cols={self.cols}, nnz={self.nnz})"


class Triplet(NamedTuple):
    i: int
    j: int
    v: float


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    """Row-major dense matrix; ``data`` has shape ``(rows, cols)``."""

    rows: int
    cols: int
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64).reshape(self.rows, self.cols)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_array(cls, arr) -> "DenseMatrix":
        arr = np.atleast_2d(np.asarray(arr, dtype=np.float64))
        return cls(arr.shape[0], arr.shape[1], arr)


def _check_dense_size(rows: int, cols: int) -> None:
    if rows * cols > DENSE_LIMIT:
        raise CapacityError(f"{rows}x{cols} exceeds dense limit of {DENSE_LIMIT} elements")


# -- construction ------------------------------------------------------------

def csr_from_coo(i, j, v, rows: int, cols: int) -> CsrMatrix:
    """Build a CSR matrix from coordinate arrays, summing duplicates.

    Duplicates are summed in input order, so the result is deterministic.
    """
    i = np.asarray(i, dtype=np.int64).ravel()
    j = np.asarray(j, dtype=np.int64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if not (len(i) == len(j) == len(v)):
        raise ValueError("coordinate arrays differ in length")
    if len(i):
        bad = (i < 0) | (i >= rows) | (j < 0) | (j >= cols)
        if bad.any():
            k = int(np.flatnonzero(bad)[0])
            raise BoundsError(f"entry ({i[k]}, {j[k]}) outside {rows}x{cols}")

    order = np.lexsort((j, i))
    i, j, v = i[order], j[order], v[order]
    if len(i):
        starts = np.flatnonzero(np.r_[True, (i[1:] != i[:-1]) | (j[1:] != j[:-1])])
        v = np.add.reduceat(v, starts)
        i, j = i[starts], j[starts]
    row_ptr = np.zeros(rows + 1, dtype=np.int64)
    np.cumsum(np.bincount(i, minlength=rows), out=row_ptr[1:])
    return CsrMatrix(rows, cols, v, j, row_ptr)


def csr_from_triplets(triplets: Iterable, rows: int, cols: int) -> CsrMatrix:
    trip = [tuple(t) for t in triplets]
    if not trip:
        return csr_from_coo([], [], [], rows, cols)
    i, j, v = zip(*trip)
    return csr_from_coo(i, j, v, rows, cols)


def csr_from_dense(dense) -> CsrMatrix:
    """Compress the nonzero entries of a dense matrix or 2-D array."""
    arr = dense.data if isinstance(dense, DenseMatrix) else np.atleast_2d(np.asarray(dense, dtype=float))
    i, j = np.nonzero(arr)
    return csr_from_coo(i, j, arr[i, j], arr.shape[0], arr.shape[1])


def identity(n: int) -> CsrMatrix:
    return CsrMatrix(n, n, np.ones(n), np.arange(n), np.arange(n + 1))


def to_dense(m: CsrMatrix) -> DenseMatrix:
    _check_dense_size(m.rows, m.cols)
    data = np.zeros((m.rows, m.cols))
    row_idx = np.repeat(np.arange(m.rows), np.diff(m.row_ptr))
    data[row_idx, m.col_id] = m.value
    return DenseMatrix(m.rows, m.cols, data)


def generate_synthetic(rows: int, cols: int, density: float, seed: int) -> CsrMatrix:
    """Uniformly random sparsity pattern with values drawn from [1, 2).

    The pattern holds exactly ``round(density * rows * cols)`` entries.
    """
    if not 0.0 < density <= 1.0:
        raise ValueError(f"density must lie in (0, 1], got {density}")
    total = rows * cols
    target = min(total, int(round(density * total)))
    rng = np.random.default_rng(seed)
    flat = np.sort(rng.choice(total, size=target, replace=False)) if target else np.zeros(0, np.int64)
    values = rng.uniform(1.0, 2.0, size=target)
    i, j = np.divmod(flat, cols)
    row_ptr = np.zeros(rows + 1, dtype=np.int64)
    np.cumsum(np.bincount(i, minlength=rows), out=row_ptr[1:])
    return CsrMatrix(rows, cols, values, j, row_ptr)


# -- validation --------------------------------------------------------------

ROW_PTR_START = "row_ptr[0] == 0"
ROW_PTR_MONOTONE = "row_ptr non-decreasing"
LENGTH_MISMATCH = "length mismatch"
COL_ID_RANGE = "col_id in range"
COL_ID_ORDER = "strictly increasing col_id"
COL_ID_DUPLICATE = "duplicate col_id"
STORED_ZERO = "stored zero"


@dataclass(frozen=True)
class Violation:
    label: str
    detail: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def labels(self) -> set[str]:
        return {v.label for v in self.violations} | {w.label for w in self.warnings}

    def format(self) -> str:
        if self.ok and not self.warnings:
            return "ok"
        lines = [f"violation: {v.label}: {v.detail}" for v in self.violations]
        lines += [f"warning: {w.label}: {w.detail}" for w in self.warnings]
        return "\n".join(lines)


def validate_csr(m: CsrMatrix) -> ValidationReport:
    """Check every structural invariant of ``m`` and report all failures."""
    report = ValidationReport()
    bad = report.violations.append
    rp, cid, val = m.row_ptr, m.col_id, m.value

    if len(rp) != m.rows + 1:
        bad(Violation(LENGTH_MISMATCH, f"len(row_ptr)={len(rp)}, expected rows+1={m.rows + 1}"))
    if len(val) != len(cid):
        bad(Violation(LENGTH_MISMATCH, f"len(value)={len(val)} != len(col_id)={len(cid)}"))
    if len(rp) and rp[-1] != len(val):
        bad(Violation(LENGTH_MISMATCH, f"row_ptr[-1]={rp[-1]} != len(value)={len(val)}"))
    if len(rp) and rp[0] != 0:
        bad(Violation(ROW_PTR_START, f"row_ptr[0]={rp[0]}"))
    drops = np.flatnonzero(np.diff(rp) < 0)
    for r in drops:
        bad(Violation(ROW_PTR_MONOTONE, f"row_ptr[{r}]={rp[r]} > row_ptr[{r + 1}]={rp[r + 1]}"))

    out = np.flatnonzero((cid < 0) | (cid >= m.cols))
    for k in out:
        bad(Violation(COL_ID_RANGE, f"col_id[{k}]={cid[k]} outside [0, {m.cols})"))

    structured = (
        len(rp) == m.rows + 1 and len(rp) > 0 and rp[0] == 0 and rp[-1] == len(cid) == len(val)
        and not len(drops)
    )
    if structured and len(cid) > 1:
        steps = np.diff(cid)
        # positions k where cid[k] and cid[k+1] share a row
        same_row = np.ones(len(steps), dtype=bool)
        boundaries = rp[1:-1]
        boundaries = boundaries[(boundaries > 0) & (boundaries < len(cid))]
        same_row[boundaries - 1] = False
        row_of = np.searchsorted(rp, np.arange(len(steps)), side="right") - 1
        for label, mask in ((COL_ID_DUPLICATE, steps == 0), (COL_ID_ORDER, steps < 0)):
            for r in np.unique(row_of[mask & same_row]):
                bad(Violation(label, f"row {r}: col_id {cid[rp[r]:rp[r + 1]].tolist()}"))

    for k in np.flatnonzero(val == 0.0):
        report.warnings.append(Violation(STORED_ZERO, f"value[{k}] is an explicit zero"))
    return report


def matrices_equal(a: CsrMatrix, b: CsrMatrix, rel_tol: float = 0.0) -> bool:
    """Pattern and value equality, ignoring entries with ``|v| <= ZERO_FLOOR``."""
    if a.shape != b.shape:
        return False

    def significant(m):
        keep = np.abs(m.value) > ZERO_FLOOR
        rows = np.repeat(np.arange(m.rows), np.diff(m.row_ptr))
        return rows[keep], m.col_id[keep], m.value[keep]

    ra, ca, va = significant(a)
    rb, cb, vb = significant(b)
    if len(va) != len(vb) or not (np.array_equal(ra, rb) and np.array_equal(ca, cb)):
        return False
    return bool(np.all(np.abs(va - vb) <= rel_tol * np.maximum(np.abs(va), np.abs(vb))))


# -- Matrix Market -----------------------------------------------------------

_FIELDS = {"real", "integer", "pattern"}
_SYMMETRIES = {"general", "symmetric"}


def parse_matrix_market(text: Union[str, TextIO]) -> CsrMatrix:
    """Parse a coordinate Matrix Market stream.

    Symmetric inputs are expanded, duplicates summed and pattern entries set
    to 1.0.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    header = stream.readline()
    tokens = header.split()
    if len(tokens) != 5 or tokens[0].lower() != "%%matrixmarket":
        raise ParseError(f"malformed header: {header.strip()!r}")
    obj, fmt, fld, sym = (t.lower() for t in tokens[1:])
    if obj != "matrix":
        raise UnsupportedError(f"object {obj!r}")
    if fmt != "coordinate":
        raise UnsupportedError(f"format {fmt!r}")
    if fld not in _FIELDS:
        raise UnsupportedError(f"field {fld!r}")
    if sym not in _SYMMETRIES:
        raise UnsupportedError(f"symmetry {sym!r}")

    lines = (ln for ln in stream if ln.strip() and not ln.lstrip().startswith("%"))
    size = next(lines, None)
    try:
        rows, cols, nnz = (int(t) for t in size.split())
    except (AttributeError, ValueError):
        raise ParseError(f"malformed size line: {size!r}") from None

    ncol = 2 if fld == "pattern" else 3
    ii, jj, vv = [], [], []
    count = 0
    for lineno, ln in enumerate(lines):
        count += 1
        parts = ln.split()
        if len(parts) != ncol:
            raise ParseError(f"entry {lineno + 1}: expected {ncol} fields, got {ln.strip()!r}")
        try:
            i, j = int(parts[0]) - 1, int(parts[1]) - 1
            v = 1.0 if fld == "pattern" else float(parts[2])
        except ValueError:
            raise ParseError(f"entry {lineno + 1}: bad number in {ln.strip()!r}") from None
        if not (0 <= i < rows and 0 <= j < cols):
            raise BoundsError(f"entry ({i + 1}, {j + 1}) outside {rows}x{cols}")
        ii.append(i)
        jj.append(j)
        vv.append(v)
        if sym == "symmetric" and i != j:
            ii.append(j)
            jj.append(i)
            vv.append(v)
    if count != nnz:
        raise ParseError(f"size line declares {nnz} entries, found {count}")
    return csr_from_coo(ii, jj, vv, rows, cols)


def read_matrix_market(path: Union[str, os.PathLike]) -> CsrMatrix:
    try:
        with open(path) as fh:
            return parse_matrix_market(fh)
    except OSError as exc:
        raise IoError(f"{path}: {exc.strerror or exc}") from exc
    except (ParseError, BoundsError, UnsupportedError) as exc:
        raise type(exc)(f"{path}: {exc}") from exc


def write_matrix_market(m: CsrMatrix, dest: Union[str, os.PathLike, TextIO]) -> None:
    """Write ``m`` as ``coordinate real general`` with full float precision."""
    lines = ["%%MatrixMarket matrix coordinate real general", f"{m.rows} {m.cols} {m.nnz}"]
    for i in range(m.rows):
        for j, v in zip(*m.row(i)):
            lines.append(f"{i + 1} {j + 1} {float(v)!r}")
    text = "\n".join(lines) + "\n"
    if hasattr(dest, "write"):
        dest.write(text)
        return
    try:
        with open(dest, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"{dest}: {exc.strerror or exc}") from exc

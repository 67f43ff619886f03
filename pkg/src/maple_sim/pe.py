"""Functional and timing model of a single Maple processing element.

A row of ``C`` is produced in three steps:

1. :func:`load_row_buffers` intersects ``A[i, :]`` with the nonempty rows of
   ``B`` and fills the A-row buffer (ARB) and B-rows buffer (BRB).
2. :func:`schedule_and_execute` streams ARB x BRB products through ``P`` MAC
   units into the partial sum buffer (PSB), one register per output column.
3. :func:`drain_psb` emits the occupied PSB registers as a CSR row.

Timing: products issue in FIFO order, at most ``P`` per cycle, and two
products aimed at the same PSB register never share a cycle because each
register owns a single adder.  Issue is in order, so a conflicting product
closes the current issue group.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .csr import CsrMatrix
from .errors import BoundsError, CapacityError, ShapeError
from .events import EventCounts, EventKind


@dataclass(slots=True)
class ArbEntry:
    value: float
    k_prime: int
    row_i: int
    reps: int


@dataclass(slots=True)
class BrbEntry:
    value: float
    j_prime: int
    k_prime: int


@dataclass(slots=True)
class PsbRegister:
    j: int
    value: float = 0.0
    occupied: bool = False


@dataclass
class MaplePeState:
    mac_count: int
    width: int
    arb_capacity: Optional[int] = None
    brb_capacity: Optional[int] = None
    record_products: bool = False
    arb: deque = field(default_factory=deque)
    brb: deque = field(default_factory=deque)
    psb: list = field(default_factory=list)
    cycle: int = 0
    trace: EventCounts = field(default_factory=EventCounts)
    current_row: Optional[int] = None
    # instrumentation, filled only when record_products is set
    products: list = field(default_factory=list)
    schedule: list = field(default_factory=list)
    _touched: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.mac_count < 1:
            raise ValueError("a PE needs at least one MAC unit")
        if not self.psb:
            self.psb = [PsbRegister(j) for j in range(self.width)]

    @property
    def idle(self) -> bool:
        return not self.arb and not self.brb and not self._touched


def intersect_rows(
    a_row_colids: Sequence[int], b: CsrMatrix, events: Optional[EventCounts] = None
) -> list[int]:
    """Keep the ``k'`` whose row of ``b`` holds at least one nonzero."""
    ptr = b.row_ptr
    survivors = []
    for k in a_row_colids:
        k = int(k)
        if not 0 <= k < b.rows:
            raise BoundsError(f"k'={k} outside B rows [0, {b.rows})")
        if ptr[k + 1] > ptr[k]:
            survivors.append(k)
    if events is not None:
        events.add(EventKind.INTERSECTION, len(a_row_colids))
    return survivors


def load_row_buffers(pe: MaplePeState, A: CsrMatrix, B: CsrMatrix, i: int) -> MaplePeState:
    if A.cols != B.rows:
        raise ShapeError(f"cannot multiply {A.rows}x{A.cols} by {B.rows}x{B.cols}")
    if B.cols != pe.width:
        raise ShapeError(f"PSB width {pe.width} != B.cols {B.cols}")
    if not pe.idle:
        raise RuntimeError("PE must be idle before loading a new row")
    if not 0 <= i < A.rows:
        raise BoundsError(f"row {i} outside [0, {A.rows})")

    ks, avals = A.row(i)
    a_of = dict(zip(ks.tolist(), avals.tolist()))
    survivors = intersect_rows(ks.tolist(), B, pe.trace)
    b_ptr = B.row_ptr
    reps = [int(b_ptr[k + 1] - b_ptr[k]) for k in survivors]
    if pe.arb_capacity is not None and len(survivors) > pe.arb_capacity:
        raise CapacityError(f"row {i}: {len(survivors)} ARB entries exceed capacity {pe.arb_capacity}")
    if pe.brb_capacity is not None and sum(reps) > pe.brb_capacity:
        raise CapacityError(f"row {i}: {sum(reps)} BRB entries exceed capacity {pe.brb_capacity}")

    for k, n in zip(survivors, reps):
        pe.arb.append(ArbEntry(a_of[k], k, i, n))
        lo = b_ptr[k]
        for j, v in zip(B.col_id[lo:lo + n].tolist(), B.value[lo:lo + n].tolist()):
            pe.brb.append(BrbEntry(v, j, k))
    pe.current_row = i

    trace = pe.trace
    trace.add(EventKind.L1_MAC, len(pe.arb), tag="ARB")
    trace.add(EventKind.L1_MAC, len(pe.brb), tag="BRB")
    if survivors:
        # one CSR decode for the A row plus one per B row streamed in
        trace.add(EventKind.COMPRESS_DECOMPRESS, 1 + len(survivors))
    return pe


def schedule_and_execute(pe: MaplePeState) -> MaplePeState:
    """Run every buffered product through the MAC units into the PSB."""
    if not pe.arb:
        return pe
    psb, touched = pe.psb, pe._touched
    P = pe.mac_count
    n_products = 0
    cycles = 0
    in_group = 0
    busy: set[int] = set()
    group: list = []
    while pe.arb:
        a = pe.arb.popleft()
        for _ in range(a.reps):
            b = pe.brb.popleft()
            if b.k_prime != a.k_prime:
                raise RuntimeError(f"BRB entry from row {b.k_prime} paired with ARB k'={a.k_prime}")
            j = b.j_prime
            if in_group == P or j in busy:
                cycles += 1
                in_group = 0
                busy.clear()
                if pe.record_products:
                    pe.schedule.append(group)
                    group = []
            in_group += 1
            busy.add(j)
            reg = psb[j]
            if reg.occupied:
                reg.value += a.value * b.value
            else:
                reg.value = a.value * b.value
                reg.occupied = True
                touched.append(j)
            n_products += 1
            if pe.record_products:
                pe.products.append((a.k_prime, j))
                group.append((a.k_prime, j))
    if pe.brb:
        raise RuntimeError(f"{len(pe.brb)} BRB entries left without a matching ARB entry")
    if in_group:
        cycles += 1
        if pe.record_products:
            pe.schedule.append(group)
    pe.cycle += cycles
    pe.trace.add(EventKind.MAC_OP, n_products)
    pe.trace.add(EventKind.L0_MAC, n_products, tag="PSB")
    return pe


def drain_psb(pe: MaplePeState) -> tuple[tuple[list[float], list[int]], MaplePeState]:
    """Emit occupied PSB registers in ascending column order and clear them."""
    cols = sorted(pe._touched)
    vals = []
    for j in cols:
        reg = pe.psb[j]
        vals.append(reg.value)
        reg.value = 0.0
        reg.occupied = False
    pe._touched = []
    pe.current_row = None
    if cols:
        pe.trace.add(EventKind.COMPRESS_DECOMPRESS, 1)
        pe.trace.add(EventKind.L1_MAC, len(cols), tag="OUT")
    return (vals, cols), pe


def process_row(pe: MaplePeState, A: CsrMatrix, B: CsrMatrix, i: int):
    """Load, execute and drain row ``i``; returns ``(vals, cols, cycles)``."""
    start = pe.cycle
    load_row_buffers(pe, A, B, i)
    schedule_and_execute(pe)
    (vals, cols), _ = drain_psb(pe)
    return vals, cols, pe.cycle - start

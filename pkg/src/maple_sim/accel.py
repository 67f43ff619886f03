"""Accelerator-level simulation of PE arrays running C = A @ B.

Rows of ``A`` are dealt round-robin to the PEs.  PEs run concurrently and the
rows assigned to one PE run back to back, so the total cycle count is the
maximum over PEs of their summed per-row cycles.  Interconnect contention is
not modelled.

Besides the Maple PE, two single-MAC baseline PEs are available as coarse
event models:

``matraptor-baseline``
    Products are appended to sorting queues and merged in repeated passes.
``extensor-baseline``
    Every partial sum makes a round trip through the partial output buffer.

Both compute the same products as Maple in the same order, so every
configuration returns bit-identical output.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Union

import numpy as np

from .csr import CsrMatrix
from .errors import ConfigError, IoError, ShapeError
from .events import EventCounts, EventKind
from .pe import MaplePeState, intersect_rows, process_row

PE_KINDS = ("maple", "matraptor-baseline", "extensor-baseline")
MERGE_POLICIES = ("tree", "single", "linear")
INTERCONNECTS = ("crossbar", "noc")


@dataclass(frozen=True)
class MemoryLevel:
    level: str
    role: str


@dataclass(frozen=True)
class AcceleratorConfig:
    name: str
    pe_count: int
    macs_per_pe: int
    pe_kind: str
    memory_levels: tuple[MemoryLevel, ...] = ()
    interconnect: str = "crossbar"
    merge_policy: str = "tree"
    arb_capacity: Optional[int] = None
    brb_capacity: Optional[int] = None

    def __post_init__(self):
        if self.pe_kind not in PE_KINDS:
            raise ConfigError(f"unknown pe_kind {self.pe_kind!r}; expected one of {PE_KINDS}")
        if self.pe_count < 1:
            raise ConfigError("pe_count must be >= 1")
        if self.macs_per_pe < 1:
            raise ConfigError("macs_per_pe must be >= 1")
        if self.pe_kind != "maple" and self.macs_per_pe != 1:
            raise ConfigError(f"{self.pe_kind} PEs have exactly one MAC unit")
        if self.interconnect not in INTERCONNECTS:
            raise ConfigError(f"unknown interconnect {self.interconnect!r}")
        if self.merge_policy not in MERGE_POLICIES:
            raise ConfigError(f"unknown merge_policy {self.merge_policy!r}")
        for cap in (self.arb_capacity, self.brb_capacity):
            if cap is not None and cap < 1:
                raise ConfigError("buffer capacities must be positive")
        levels = tuple(
            lv if isinstance(lv, MemoryLevel) else MemoryLevel(**lv) for lv in self.memory_levels
        )
        for lv in levels:
            if lv.level not in ("L0", "L1", "L2"):
                raise ConfigError(f"unknown memory level {lv.level!r}")
        object.__setattr__(self, "memory_levels", levels)

    @property
    def total_macs(self) -> int:
        return self.pe_count * self.macs_per_pe

    def roles(self, level: str) -> list[str]:
        return [lv.role for lv in self.memory_levels if lv.level == level]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "pe_count": self.pe_count,
            "macs_per_pe": self.macs_per_pe,
            "pe_kind": self.pe_kind,
            "memory_levels": [{"level": lv.level, "role": lv.role} for lv in self.memory_levels],
            "interconnect": self.interconnect,
            "merge_policy": self.merge_policy,
            "arb_capacity": self.arb_capacity,
            "brb_capacity": self.brb_capacity,
        }


def _levels(*pairs):
    return tuple(MemoryLevel(lv, role) for lv, role in pairs)


PRESETS: dict[str, AcceleratorConfig] = {
    "baseline-matraptor": AcceleratorConfig(
        "baseline-matraptor", 8, 1, "matraptor-baseline",
        _levels(("L1", "SpAL"), ("L1", "SpBL"), ("L0", "queues")), "crossbar",
    ),
    "maple-matraptor": AcceleratorConfig(
        "maple-matraptor", 4, 2, "maple",
        _levels(("L0", "ARB"), ("L0", "BRB"), ("L0", "PSB")), "crossbar",
    ),
    "baseline-extensor": AcceleratorConfig(
        "baseline-extensor", 128, 1, "extensor-baseline",
        _levels(("L1", "LLB"), ("L1", "POB"), ("L0", "PEB")), "noc",
    ),
    "maple-extensor": AcceleratorConfig(
        "maple-extensor", 8, 16, "maple",
        _levels(("L1", "LLB"), ("L0", "ARB"), ("L0", "BRB"), ("L0", "PSB")), "noc",
    ),
}

#: baseline preset -> its Maple counterpart
PAIRINGS = {"baseline-matraptor": "maple-matraptor", "baseline-extensor": "maple-extensor"}

_DEFAULT_LEVELS = {
    "maple": _levels(("L0", "ARB"), ("L0", "BRB"), ("L0", "PSB")),
    "matraptor-baseline": PRESETS["baseline-matraptor"].memory_levels,
    "extensor-baseline": PRESETS["baseline-extensor"].memory_levels,
}


def build_config(descriptor: Union[str, Mapping, AcceleratorConfig]) -> AcceleratorConfig:
    """Resolve a preset name or a mapping of explicit fields into a config.

    A mapping may name a ``preset`` to start from; its other keys override.
    """
    if isinstance(descriptor, AcceleratorConfig):
        return descriptor
    if isinstance(descriptor, str):
        try:
            return PRESETS[descriptor]
        except KeyError:
            raise ConfigError(
                f"unknown preset {descriptor!r}; expected one of {', '.join(PRESETS)}"
            ) from None
    fields = dict(descriptor)
    base = fields.pop("preset", None)
    try:
        if base is not None:
            return replace(build_config(base), **fields)
        fields.setdefault("name", "custom")
        kind = fields.get("pe_kind")
        if "memory_levels" not in fields and kind in _DEFAULT_LEVELS:
            fields["memory_levels"] = _DEFAULT_LEVELS[kind]
        return AcceleratorConfig(**fields)
    except TypeError as exc:
        raise ConfigError(f"invalid config fields: {exc}") from None


def load_config_file(path: Union[str, os.PathLike]) -> AcceleratorConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise IoError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return build_config(data)


# -- baseline PE models ------------------------------------------------------

@dataclass
class BaselinePeState:
    kind: str
    merge_policy: str = "tree"
    cycle: int = 0
    trace: EventCounts = field(default_factory=EventCounts)


def merge_passes(distinct_k: int, policy: str = "tree") -> int:
    """Sequential merge passes over a row's queued partial sums."""
    if policy == "tree":
        return math.ceil(math.log2(max(2, distinct_k)))
    if policy == "single":
        return 1
    if policy == "linear":
        return max(1, distinct_k - 1)
    raise ConfigError(f"unknown merge_policy {policy!r}")


def _gather_row(A: CsrMatrix, B: CsrMatrix, i: int, events: EventCounts, a_tag: str, b_tag: str):
    """Intersect, fetch operands and compute row ``i`` in k'-then-j' order.

    Returns ``(vals, cols, n_products, n_survivors)``.
    """
    ks, avals = A.row(i)
    ks = ks.tolist()
    survivors = intersect_rows(ks, B, events)
    a_of = dict(zip(ks, avals.tolist()))
    b_ptr, b_col, b_val = B.row_ptr, B.col_id, B.value
    sums: dict[int, float] = {}
    n = 0
    for k in survivors:
        a = a_of[k]
        lo, hi = b_ptr[k], b_ptr[k + 1]
        for j, b in zip(b_col[lo:hi].tolist(), b_val[lo:hi].tolist()):
            if j in sums:
                sums[j] += a * b
            else:
                sums[j] = a * b
        n += hi - lo
    n = int(n)
    events.add(EventKind.L1_MAC, len(survivors), tag=a_tag)
    events.add(EventKind.L1_MAC, n, tag=b_tag)
    if survivors:
        events.add(EventKind.COMPRESS_DECOMPRESS, 1 + len(survivors))
    events.add(EventKind.MAC_OP, n)
    cols = sorted(sums)
    return [sums[j] for j in cols], cols, n, len(survivors)


def _emit_row(events: EventCounts, cols: list) -> None:
    if cols:
        events.add(EventKind.COMPRESS_DECOMPRESS, 1)
        events.add(EventKind.L1_MAC, len(cols), tag="OUT")


def matraptor_baseline_row(pe_state: BaselinePeState, A: CsrMatrix, B: CsrMatrix, i: int):
    """Single-MAC PE with sorting queues; returns ``((vals, cols), cycles, events)``.

    Each product is appended to a queue; ``merge_passes`` passes then re-read
    every queued partial sum (L0) and re-write it through the PE (PE<->MAC),
    one element per cycle.
    """
    events = EventCounts()
    vals, cols, n, distinct_k = _gather_row(A, B, i, events, "SpAL", "SpBL")
    passes = merge_passes(distinct_k, pe_state.merge_policy) if n else 0
    events.add(EventKind.L0_MAC, n * (1 + passes), tag="queues")
    events.add(EventKind.PE_MAC, n * passes, tag="queues")
    _emit_row(events, cols)
    cycles = n + passes * n
    pe_state.cycle += cycles
    pe_state.trace += events
    return (vals, cols), cycles, events


def extensor_baseline_row(pe_state: BaselinePeState, A: CsrMatrix, B: CsrMatrix, i: int):
    """Single-MAC PE that keeps partial sums in the POB; returns ``((vals, cols), cycles, events)``.

    Per product: two PEB operand reads, one POB write of the partial sum and
    one POB read when it is accumulated; a multiply cycle plus an accumulate
    cycle.
    """
    events = EventCounts()
    vals, cols, n, _ = _gather_row(A, B, i, events, "LLB", "LLB")
    events.add(EventKind.L0_MAC, 2 * n, tag="PEB")
    events.add(EventKind.L1_MAC, 2 * n, tag="POB")
    _emit_row(events, cols)
    cycles = 2 * n
    pe_state.cycle += cycles
    pe_state.trace += events
    return (vals, cols), cycles, events


# -- simulation --------------------------------------------------------------

@dataclass
class SimReport:
    config_name: str
    total_cycles: int
    events: EventCounts
    output_checksum: float
    output: CsrMatrix
    pe_cycles: list[int] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "config": self.config_name,
            "total_cycles": self.total_cycles,
            "pe_cycles": list(self.pe_cycles),
            "events": self.events.as_dict(),
            "tagged_events": {f"{k.value}:{t}": n for (k, t), n in self.events.tags.items()},
            "output_checksum": self.output_checksum,
            "output_nnz": self.output.nnz,
        }


def _dram_events(A: CsrMatrix, B: CsrMatrix, rows: np.ndarray) -> int:
    """Elements of A and B one PE streams from DRAM for its rows."""
    a_nnz = np.diff(A.row_ptr)[rows]
    b_nnz = np.diff(B.row_ptr)
    if not a_nnz.sum():
        return 0
    ks = np.concatenate([A.col_id[A.row_ptr[r]:A.row_ptr[r + 1]] for r in rows[a_nnz > 0]])
    return int(a_nnz.sum() + b_nnz[np.unique(ks)].sum())


def simulate(config: AcceleratorConfig, A: CsrMatrix, B: CsrMatrix) -> SimReport:
    config = build_config(config)
    if A.cols != B.rows:
        raise ShapeError(f"cannot multiply {A.rows}x{A.cols} by {B.rows}x{B.cols}")

    a_nnz = np.diff(A.row_ptr)
    out_rows: list = [None] * A.rows
    events = EventCounts()
    pe_cycles = []
    for p in range(config.pe_count):
        rows = np.arange(p, A.rows, config.pe_count)
        busy_rows = rows[a_nnz[rows] > 0].tolist()
        if config.pe_kind == "maple":
            pe = MaplePeState(
                config.macs_per_pe, B.cols,
                arb_capacity=config.arb_capacity, brb_capacity=config.brb_capacity,
            )
            for i in busy_rows:
                vals, cols, _ = process_row(pe, A, B, i)
                out_rows[i] = (vals, cols)
            cycles, trace = pe.cycle, pe.trace
        else:
            pe = BaselinePeState(config.pe_kind, config.merge_policy)
            row_fn = matraptor_baseline_row if config.pe_kind == "matraptor-baseline" else extensor_baseline_row
            for i in busy_rows:
                out_rows[i], _, _ = row_fn(pe, A, B, i)
            cycles, trace = pe.cycle, pe.trace
        trace.add(EventKind.L2_MAC, _dram_events(A, B, rows), tag="DRAM")
        events += trace
        pe_cycles.append(cycles)

    row_ptr = [0]
    col_id: list[int] = []
    value: list[float] = []
    for r in out_rows:
        if r is not None:
            value.extend(r[0])
            col_id.extend(r[1])
        row_ptr.append(len(col_id))
    output = CsrMatrix(A.rows, B.cols, value, col_id, row_ptr)
    events.add(EventKind.L2_MAC, output.nnz, tag="DRAM")
    return SimReport(
        config_name=config.name,
        total_cycles=max(pe_cycles),
        events=events,
        output_checksum=math.fsum(abs(v) for v in value),
        output=output,
        pe_cycles=pe_cycles,
    )

"""Per-action energy tables, energy aggregation and baseline comparisons."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

import numpy as np

from .errors import ComparisonError, IoError, TableError
from .events import COMPUTE_KINDS, EventCounts, EventKind

# Placeholder energies in normalized units. Only the ordering
# compute <= L0 <= PE <= L1 <= L2 is meaningful.
DEFAULT_ENERGIES = {
    EventKind.MAC_OP: 1.0,
    EventKind.COMPRESS_DECOMPRESS: 1.0,
    EventKind.INTERSECTION: 1.0,
    EventKind.L0_MAC: 2.0,
    EventKind.PE_MAC: 6.0,
    EventKind.L1_MAC: 20.0,
    EventKind.L2_MAC: 200.0,
}


@dataclass(frozen=True)
class EnergyTable:
    """Energy per action for each :class:`EventKind`; validated on construction."""

    energies: Mapping[EventKind, float]
    name: str = "custom"

    def __post_init__(self):
        energies = {}
        for key, val in self.energies.items():
            try:
                energies[EventKind(key)] = float(val)
            except ValueError:
                raise TableError(f"unknown event kind {key!r}") from None
        missing = [k.value for k in EventKind if k not in energies]
        if missing:
            raise TableError(f"missing event kinds: {', '.join(missing)}")
        for kind, val in energies.items():
            if not (val > 0 and math.isfinite(val)):
                raise TableError(f"{kind.value} energy must be positive and finite, got {val}")
        chain = [
            ("max(MacOp, CompressDecompress, Intersection)", max(energies[k] for k in COMPUTE_KINDS)),
            ("L0Mac", energies[EventKind.L0_MAC]),
            ("PeMac", energies[EventKind.PE_MAC]),
            ("L1Mac", energies[EventKind.L1_MAC]),
            ("L2Mac", energies[EventKind.L2_MAC]),
        ]
        for (lo_name, lo), (hi_name, hi) in zip(chain, chain[1:]):
            if lo > hi:
                raise TableError(f"ordering violated: {lo_name}={lo} > {hi_name}={hi}")
        object.__setattr__(self, "energies", {k: energies[k] for k in EventKind})

    def __getitem__(self, kind: EventKind) -> float:
        return self.energies[EventKind(kind)]

    def to_text(self) -> str:
        return "".join(f"{k.value} = {v!r}\n" for k, v in self.energies.items())


def default_table() -> EnergyTable:
    return EnergyTable(DEFAULT_ENERGIES, name="default")


def parse_energy_table(text: str, name: str = "custom") -> EnergyTable:
    """Parse ``Kind = value`` lines; ``#`` starts a comment."""
    energies: dict[EventKind, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = (part.strip() for part in line.partition("="))
        if not sep:
            raise TableError(f"line {lineno}: expected 'Kind = value', got {raw!r}")
        try:
            kind = EventKind.parse(key)
        except KeyError:
            raise TableError(f"line {lineno}: unknown event kind {key!r}") from None
        if kind in energies:
            raise TableError(f"line {lineno}: duplicate entry for {key}")
        try:
            energies[kind] = float(val)
        except ValueError:
            raise TableError(f"line {lineno}: bad value {val!r}") from None
    return EnergyTable(energies, name=name)


def load_energy_table(source: Union[str, os.PathLike, Mapping, None] = "default") -> EnergyTable:
    """Load a table from ``"default"``, a mapping, or a ``Kind = value`` file."""
    if source is None or (isinstance(source, str) and source == "default"):
        return default_table()
    if isinstance(source, EnergyTable):
        return source
    if isinstance(source, Mapping):
        return EnergyTable(dict(source))
    try:
        with open(source) as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"{source}: {exc.strerror or exc}") from exc
    return parse_energy_table(text, name=os.fspath(source))


def random_valid_table(rng: np.random.Generator) -> EnergyTable:
    """Draw a table satisfying the ordering constraint, for robustness sweeps."""
    compute = rng.uniform(0.1, 2.0, size=3)
    steps = rng.uniform(0.0, 3.0, size=4) * rng.choice([0.0, 1.0, 10.0], size=4)
    movement = compute.max() + np.cumsum(steps)
    kinds = list(EventKind)
    return EnergyTable(dict(zip(kinds, np.r_[compute, movement])), name="random")


@dataclass
class Comparison:
    energy_benefit_pct: float
    speedup_pct: float


@dataclass
class CostReport:
    total_energy: float
    breakdown: dict[EventKind, float]
    table: str = "default"
    vs_baseline: Optional[Comparison] = field(default=None)


def compute_energy(events: EventCounts, table: EnergyTable) -> CostReport:
    breakdown = {kind: n * table[kind] for kind, n in events.items()}
    return CostReport(sum(breakdown.values()), breakdown, table=table.name)


def compare_reports(candidate, baseline) -> Comparison:
    """Energy benefit and speedup of ``candidate`` over ``baseline``.

    Both arguments are ``(SimReport, CostReport)`` pairs for the same input.
    """
    c_sim, c_cost = candidate
    b_sim, b_cost = baseline
    if not math.isclose(c_sim.output_checksum, b_sim.output_checksum, rel_tol=1e-12, abs_tol=0.0):
        raise ComparisonError(
            f"output checksums differ ({c_sim.output_checksum!r} vs {b_sim.output_checksum!r}); "
            "reports are not for the same input"
        )
    if b_cost.total_energy <= 0 or b_sim.total_cycles <= 0:
        raise ComparisonError("baseline has zero energy or zero cycles")
    if c_sim.total_cycles <= 0:
        raise ComparisonError("candidate has zero cycles")
    return Comparison(
        energy_benefit_pct=100.0 * (1.0 - c_cost.total_energy / b_cost.total_energy),
        speedup_pct=100.0 * (b_sim.total_cycles / c_sim.total_cycles - 1.0),
    )

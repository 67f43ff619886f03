"""Benchmark harness: run C = A @ A across accelerator configs and report."""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

from .accel import PAIRINGS, PRESETS, AcceleratorConfig, SimReport, build_config, load_config_file, simulate
from .cost import Comparison, CostReport, compare_reports, compute_energy, load_energy_table
from .csr import CsrMatrix, generate_synthetic, read_matrix_market
from .errors import ConfigError, IoError, ShapeError
from .events import EventKind

# name -> (short name, dimension, nnz, density) of the SuiteSparse evaluation set
BENCH_MATRICES = {
    "web-Google": ("wg", 916_000, 5_100_000, 6.1e-6),
    "mario002": ("m2", 390_000, 2_100_000, 1.3e-5),
    "amazon0312": ("az", 401_000, 3_200_000, 1.9e-5),
    "m133-b3": ("mb", 200_000, 801_000, 2.0e-5),
    "scircuit": ("sc", 171_000, 959_000, 3.2e-5),
    "p2pGnutella31": ("pg", 63_000, 148_000, 3.7e-5),
    "offshore": ("of", 260_000, 4_200_000, 6.2e-5),
    "cage12": ("cg", 130_000, 2_000_000, 1.1e-4),
    "2cubes-sphere": ("cs", 101_000, 1_600_000, 1.5e-4),
    "filter3D": ("f3", 106_000, 2_700_000, 2.4e-4),
    "ca-CondMat": ("cc", 23_000, 187_000, 3.5e-4),
    "wikiVote": ("wv", 8_300, 104_000, 1.5e-3),
    "poisson3Da": ("p3", 14_000, 353_000, 1.8e-3),
    "facebook": ("fb", 4_000, 176_000, 1.1e-2),
}

_SHORT = {short: name for name, (short, *_) in BENCH_MATRICES.items()}


def lookup_preset(name: str) -> str:
    if name in BENCH_MATRICES:
        return name
    try:
        return _SHORT[name]
    except KeyError:
        raise ConfigError(f"unknown matrix preset {name!r}") from None


@dataclass(frozen=True)
class SyntheticSpec:
    rows: int
    cols: int
    density: float
    seed: int = 0
    name: Optional[str] = None

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ConfigError("synthetic dimensions must be positive")
        if not 0.0 < self.density <= 1.0:
            raise ConfigError(f"synthetic density must lie in (0, 1], got {self.density}")
        if self.seed < 0:
            raise ConfigError("synthetic seed must be non-negative")

    @classmethod
    def from_preset(cls, name: str, scale: float = 1.0, seed: int = 0) -> "SyntheticSpec":
        """Density-matched stand-in for a benchmark matrix with dimension scaled by ``scale``."""
        full = lookup_preset(name)
        short, dim, _, density = BENCH_MATRICES[full]
        n = max(1, round(dim * scale))
        label = short if scale == 1.0 else f"{short}@{scale:g}"
        return cls(n, n, density, seed, name=label)

    @classmethod
    def parse(cls, text: str) -> "SyntheticSpec":
        """Parse ``R,C,D,SEED`` or ``PRESET[,SCALE[,SEED]]``."""
        parts = [p.strip() for p in text.split(",")]
        try:
            if parts[0] and not parts[0][0].isdigit():
                scale = float(parts[1]) if len(parts) > 1 else 1.0
                seed = int(parts[2]) if len(parts) > 2 else 0
                if len(parts) > 3:
                    raise ValueError
                return cls.from_preset(parts[0], scale, seed)
            rows, cols, density, seed = parts
            return cls(int(rows), int(cols), float(density), int(seed))
        except ValueError:
            raise ConfigError(
                f"bad synthetic descriptor {text!r}; expected R,C,D,SEED or PRESET[,SCALE[,SEED]]"
            ) from None

    @property
    def label(self) -> str:
        return self.name or f"synthetic-{self.rows}x{self.cols}-d{self.density:g}-s{self.seed}"

    def build(self) -> CsrMatrix:
        return generate_synthetic(self.rows, self.cols, self.density, self.seed)


@dataclass
class RunSpec:
    input: Union[str, os.PathLike, SyntheticSpec]
    configs: Sequence[Union[str, AcceleratorConfig]]
    energy_table: Union[str, os.PathLike] = "default"
    output_format: str = "csv"
    output_path: Optional[Union[str, os.PathLike]] = None

    def __post_init__(self):
        if not self.configs:
            raise ConfigError("at least one config is required")
        if self.output_format not in ("csv", "json"):
            raise ConfigError(f"unknown output format {self.output_format!r}")


@dataclass
class RunResult:
    config: AcceleratorConfig
    matrix: str
    rows: int
    nnz: int
    sim: SimReport
    cost: CostReport


@dataclass
class BenchmarkResult:
    runs: list[RunResult]
    comparisons: dict[str, Comparison] = field(default_factory=dict)


def resolve_config(entry: Union[str, AcceleratorConfig]) -> AcceleratorConfig:
    """Preset name, ``.json`` config file path, or a ready config."""
    if isinstance(entry, str) and entry not in PRESETS and entry.endswith(".json"):
        return load_config_file(entry)
    return build_config(entry)


def load_input(source: Union[str, os.PathLike, SyntheticSpec]) -> tuple[str, CsrMatrix]:
    if isinstance(source, SyntheticSpec):
        return source.label, source.build()
    return Path(source).stem, read_matrix_market(source)


def run_benchmark(spec: RunSpec) -> BenchmarkResult:
    configs = [resolve_config(c) for c in spec.configs]
    names = [c.name for c in configs]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate config names in {names}")
    table = load_energy_table(spec.energy_table)
    matrix, A = load_input(spec.input)
    if A.rows != A.cols:
        raise ShapeError(f"{matrix}: A @ A needs a square matrix, got {A.rows}x{A.cols}")

    runs = []
    for cfg in configs:
        sim = simulate(cfg, A, A)
        runs.append(RunResult(cfg, matrix, A.rows, A.nnz, sim, compute_energy(sim.events, table)))

    by_name = {r.config.name: r for r in runs}
    comparisons = {}
    for base, maple in PAIRINGS.items():
        if names.count(base) == 1 and names.count(maple) == 1:
            b, m = by_name[base], by_name[maple]
            if b.config != PRESETS[base] or m.config != PRESETS[maple]:
                continue
            cmp = compare_reports((m.sim, m.cost), (b.sim, b.cost))
            m.cost.vs_baseline = cmp
            comparisons[maple] = cmp
    return BenchmarkResult(runs, comparisons)


# -- reporting ---------------------------------------------------------------

COLUMNS = (
    ["config", "matrix", "rows", "nnz", "total_cycles"]
    + [k.value for k in EventKind]
    + ["total_energy", "energy_benefit_pct", "speedup_pct"]
)


def _record(run: RunResult) -> dict:
    cmp = run.cost.vs_baseline
    rec = {
        "config": run.config.name,
        "matrix": run.matrix,
        "rows": run.rows,
        "nnz": run.nnz,
        "total_cycles": run.sim.total_cycles,
    }
    rec.update(run.sim.events.as_dict())
    rec["total_energy"] = run.cost.total_energy
    rec["energy_benefit_pct"] = cmp.energy_benefit_pct if cmp else None
    rec["speedup_pct"] = cmp.speedup_pct if cmp else None
    return rec


def _sorted_runs(results) -> list[RunResult]:
    if isinstance(results, (BenchmarkResult, RunResult)):
        results = [results]
    runs: list[RunResult] = []
    for r in results:
        runs.extend(r.runs if isinstance(r, BenchmarkResult) else [r])
    preset_order = list(PRESETS)
    seen: list[str] = []
    for r in runs:
        if r.config.name not in preset_order and r.config.name not in seen:
            seen.append(r.config.name)
    rank = {name: i for i, name in enumerate(preset_order + seen)}
    return sorted(runs, key=lambda r: (rank[r.config.name], r.matrix))


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_report(results, fmt: str = "csv") -> str:
    records = [_record(r) for r in _sorted_runs(results)]
    if not records:
        raise ValueError("no results to report")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for rec in records:
            writer.writerow([_cell(rec[c]) for c in COLUMNS])
        return buf.getvalue()
    if fmt == "json":
        return json.dumps(records, indent=2) + "\n"
    raise ConfigError(f"unknown output format {fmt!r}")


def emit_report(results, fmt: str, path: Union[str, os.PathLike]) -> Path:
    """Write the report for ``results`` to ``path`` as CSV or JSON."""
    text = render_report(results, fmt)
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise IoError(f"{path}: {exc.strerror or exc}") from exc
    return path


def read_report(path: Union[str, os.PathLike]) -> list[dict]:
    """Load an emitted CSV or JSON report back into records."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json" or text.lstrip().startswith("["):
        return json.loads(text)
    records = []
    for row in csv.DictReader(io.StringIO(text)):
        rec = {}
        for key, val in row.items():
            if key in ("config", "matrix"):
                rec[key] = val
            elif val == "":
                rec[key] = None
            elif key in ("total_energy", "energy_benefit_pct", "speedup_pct"):
                rec[key] = float(val)
            else:
                rec[key] = int(val)
        records.append(rec)
    return records

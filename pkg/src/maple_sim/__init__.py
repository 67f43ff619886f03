"""Row-wise product (Gustavson) SpGEMM kernels and a Maple PE accelerator simulator."""

from .accel import PRESETS, AcceleratorConfig, SimReport, build_config, simulate
from .cost import EnergyTable, compare_reports, compute_energy, load_energy_table
from .csr import (
    CsrMatrix,
    DenseMatrix,
    Triplet,
    csr_from_triplets,
    generate_synthetic,
    matrices_equal,
    parse_matrix_market,
    read_matrix_market,
    to_dense,
    validate_csr,
)
from .events import EventCounts, EventKind
from .kernel import dense_matmul_oracle, spgemm_reference

__version__ = "0.1.0"

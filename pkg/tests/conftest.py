from pathlib import Path

import pytest

from maple_sim.csr import CsrMatrix, csr_from_triplets, read_matrix_market

DATA = Path(__file__).parent / "data"

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict = {}


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def running_example():
    return read_matrix_market(DATA / "running_example.mtx")


@pytest.fixture
def small_pair():
    """First row of A touches k'=0 and k'=2; B rows 0 and 2 feed columns {0,2} and {2}."""
    A = csr_from_triplets([(0, 0, 1.0), (0, 2, 2.0)], 3, 3)
    B = csr_from_triplets([(0, 0, 3.0), (0, 2, 4.0), (2, 2, 5.0)], 3, 3)
    return A, B


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(str(k).split(".")[0]), str(k))):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if passed else 'FAIL'}  {detail}")

import numpy as np
import pytest

from polyvem.geometry import CellGeometry
from polyvem.harness import POLYGON_ZOO, zoo_cells


@pytest.fixture(scope="session")
def zoo():
    return {cell.name: cell for cell in zoo_cells()}


@pytest.fixture
def unit_square():
    return CellGeometry.from_polygon(POLYGON_ZOO["square"], name="square")


@pytest.fixture
def unit_triangle():
    return CellGeometry.from_polygon(POLYGON_ZOO["triangle"], name="triangle")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def acceptance_record():
    """Collects one verdict line per acceptance criterion for the terminal summary."""

    def record(number: int, passed: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])

import numpy as np
import pytest

from dglocality.field import make_grid, norm_sq
from dglocality.gaussian import GaussianState

ENTANGLED = GaussianState(0.6 + 0.2j, 0.5 + 0.4j, 0.8 - 0.1j, 0.1 + 0.2j, -0.2 + 0.1j, 0)
FACTORIZED = GaussianState(0.6 + 0.2j, 0, 0.8 - 0.1j, 0.1 + 0.2j, -0.2 + 0.1j, 0)


def normalized(f):
    return f.with_values(f.values / np.sqrt(norm_sq(f)))


@pytest.fixture(scope="session")
def grid64():
    return make_grid(8.0, 64, 8.0, 64)


@pytest.fixture(scope="session")
def grid128():
    return make_grid(8.0, 128, 8.0, 128)


@pytest.fixture(scope="session")
def entangled128(grid128):
    return normalized(ENTANGLED.tabulate(grid128))


ACCEPTANCE_LINES = {}


@pytest.fixture
def record():
    """Store the one-line outcome of an acceptance criterion."""
    def _record(number, ok, detail):
        ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(ACCEPTANCE_LINES[number])
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])

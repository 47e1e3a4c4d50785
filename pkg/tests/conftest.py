import numpy as np
import pytest

from shockspec.scenarios import make_diagonal_shock


@pytest.fixture
def lax_shock():
    return make_diagonal_shock(-1.0, 1.0, -1.0, -2.0, (0.0, -1.0), (0.0, 1.0), (0.0, 0.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

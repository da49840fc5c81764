import numpy as np
import pytest

from steerkit import Assemblage

import oracles
from report import ACCEPTANCE_LINES


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def werner_printed():
    return Assemblage(oracles.printed_werner_elements())


@pytest.fixture
def restricted_point():
    def make(x1, z1, y1=0.0):
        return Assemblage(oracles.restricted_matrices(x1, y1, z1))
    return make


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

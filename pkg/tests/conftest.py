import numpy as np
import pytest

from twophoton import ModelParams, ParitySector, SectorState

ACCEPTANCE_LINES = []


@pytest.fixture
def vacuum():
    """Chain state |0,-> of the +1 sector."""
    return SectorState(ParitySector.PLUS_ONE, 0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def discrete(g, omega0=0.8):
    return ModelParams(1.0, omega0, g)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

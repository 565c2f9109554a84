import numpy as np
import pytest

from enrich.shaper import ShaperConfig


@pytest.fixture
def config8():
    return ShaperConfig()


@pytest.fixture
def config3():
    return ShaperConfig(n=3, total_bw=100, thresholds=(100, 60, 25))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

import numpy as np
import pytest

from losmimo import ArrayConfig, random_scenario

_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(number, passed, detail)``."""

    def record(number, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def cfg():
    return ArrayConfig(100, 0.5)


@pytest.fixture
def paper_scenario():
    return random_scenario(7, 3, r=3, K=5, snr_db=10.0, sir_db=-7.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)

import numpy as np
import pytest

from tvstable.tvarma import TvArmaModel


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def tvar1():
    # alpha_1(u) = -0.3 + 0.8 u, the tvAR(1) curve used throughout the MC tables
    return TvArmaModel.from_coeffs(ar=[[-0.3, 0.8]], gamma=1.0, alpha=1.9, beta=0.9)


_ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    _ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

import numpy as np
import pytest

from hedscore import ProbabilityStream


def random_stream(rng: np.random.Generator, t_min: int = 4, t_max: int = 200) -> ProbabilityStream:
    horizon = int(rng.integers(t_min, t_max + 1))
    t_start = int(rng.integers(1, horizon))
    return ProbabilityStream(rng.uniform(0.0, 1.0, horizon + 1), t_start)


def step_stream(t_start: int = 5, horizon: int = 10) -> ProbabilityStream:
    p = np.zeros(horizon + 1)
    p[t_start:] = 1.0
    return ProbabilityStream(p, t_start)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])

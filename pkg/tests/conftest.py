import os

import pytest
from hypothesis import HealthCheck, settings

from ginzburg.medium import MediumParams

settings.register_profile(
    "ci", max_examples=40, deadline=None, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))


@pytest.fixture(scope="session")
def silicon():
    from ginzburg.experiment import silicon_medium
    return silicon_medium()


@pytest.fixture(scope="session")
def weak_medium():
    """Omega = 1, g = 0.3, Gamma/Omega = 1e-3: the small-dissipation test medium."""
    return MediumParams(1.0, 0.3, 0.004)


@pytest.fixture(scope="session")
def unit_medium():
    return MediumParams(1.0, 1.0, 0.5)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Shared list of one-line criterion verdicts, echoed in the terminal summary."""
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

import pytest

from homeostat.device import DeviceParams

_ACCEPTANCE_LINES = []


@pytest.fixture
def d():
    return DeviceParams()


@pytest.fixture(scope="session")
def acceptance_report():
    """Collects one line per acceptance criterion for the terminal summary."""
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import pytest

from kerrmagno.params import reference_params
from kerrmagno.stability import classify_phase

MW = 1e-3


@pytest.fixture(scope="session")
def ref():
    return reference_params()


@pytest.fixture(scope="session")
def phase50():
    return classify_phase(reference_params(drive_power=50 * MW))


@pytest.fixture(scope="session")
def phase130():
    return classify_phase(reference_params(drive_power=130 * MW))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import numpy as np
import pytest

from nonrecip.atomic import transition_tables
from nonrecip.susceptibility import CouplingParams, MediumParams, calibrate_gamma_gs


@pytest.fixture(scope="session")
def tables():
    return transition_tables()


@pytest.fixture(scope="session")
def gamma_gs():
    return calibrate_gamma_gs()


@pytest.fixture(scope="session")
def coupling():
    return CouplingParams(2.5, 0.0)


@pytest.fixture(scope="session")
def medium(gamma_gs):
    return MediumParams(19.0, 0.5, gamma_gs)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config.acceptance_lines = {}


@pytest.fixture
def acceptance(request):
    """Record one verdict line per acceptance criterion."""

    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        request.config.acceptance_lines[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.acceptance_lines
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])

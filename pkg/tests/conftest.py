import numpy as np
import pytest

from robin_sep.model.field import oracle_field
from robin_sep.params import ReservoirParams
from robin_sep.pde import solve_controlled

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def params():
    return ReservoirParams(0.2, 0.8, 1.0, 1.0)


@pytest.fixture(scope="session")
def oracle_path(params):
    """Tilted path of the ramped sine field from the stationary profile, T = 0.5."""
    return solve_controlled(params.stationary_profile, params, oracle_field(), 0.5, 512, 2000)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

import numpy as np
import pytest

from ocean_tdp.fixtures import TOY_CATEGORIES
from ocean_tdp.state import PreparedState
from ocean_tdp.twoway import TwoWaySelection


@pytest.fixture
def toy_state():
    return PreparedState.from_categories(TOY_CATEGORIES)


@pytest.fixture
def toy_sel(toy_state):
    return TwoWaySelection.full(toy_state)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is not None and module.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in module.REPORT:
            terminalreporter.write_line(line)

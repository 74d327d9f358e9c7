import numpy as np
import pytest

from acceptance_report import record_outcome, write_summary  # noqa: F401


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def line5():
    """Five points on the real line at 0, 1, 3, 6 and 10."""
    return np.array([[0.0], [1.0], [3.0], [6.0], [10.0]])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    record_outcome(item, outcome.get_result())


def pytest_terminal_summary(terminalreporter):
    write_summary(terminalreporter)

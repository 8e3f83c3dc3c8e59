import numpy as np
import pytest

from onionqrc.data import synth_generate


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def synth_dataset():
    return synth_generate(0)


def pytest_terminal_summary(terminalreporter):
    try:
        from tests import acceptance_log
    except ImportError:
        return
    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)

import pytest

import _criteria
from offloadlab.channel import ChannelModel
from offloadlab.cost import SystemParams
from offloadlab.queueing import QueueModel
from offloadlab.scenario import GeneratorParams, generate_synthetic


def pytest_terminal_summary(terminalreporter):
    if _criteria.LINES:
        terminalreporter.section("acceptance checks")
        for line in _criteria.LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def params():
    return SystemParams()


@pytest.fixture
def channel():
    return ChannelModel(sigma=8.0)


@pytest.fixture
def queue():
    return QueueModel()


@pytest.fixture(scope="session")
def small_trace():
    # 300 frames is enough for behavioral checks and keeps module tests fast
    return generate_synthetic(GeneratorParams(), 300, seed=11)

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ambiguous_aep.graphs import Graph, cycle_graph

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def c5() -> Graph:
    return cycle_graph(5)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

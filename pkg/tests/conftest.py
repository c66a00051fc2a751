import numpy as np
import pytest
from hypothesis import settings

from rhscellfree.channel import RhsGeometry

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


@pytest.fixture
def small_geom():
    return RhsGeometry(nx=8, ny=8)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

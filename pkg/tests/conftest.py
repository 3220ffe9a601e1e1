import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ncindex.lattice import TorusGeometry
from ncindex.models import hofstadter, ssh

settings.register_profile(
    "default", max_examples=25, deadline=None, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES = []


def record_acceptance(line: str):
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def hof():
    return hofstadter("1/3")


@pytest.fixture(scope="session")
def ssh_top():
    return ssh(1.0, 2.0)


@pytest.fixture(scope="session")
def ssh_triv():
    return ssh(2.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def geom66():
    return TorusGeometry((6, 6))

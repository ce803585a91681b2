import numpy as np
import pytest

from revdmp import ClassicalDMP, ReversibleDMP
from revdmp.sim import min_jerk_demo, sigmoid_arcs_demo

DT = 0.002


@pytest.fixture(scope="session")
def mj_demo():
    """Fifth-order point-to-point demo: 0 -> 1 in 2 s."""
    return min_jerk_demo(0.0, 1.0, 2.0, DT)


@pytest.fixture(scope="session")
def rev_model(mj_demo):
    return ReversibleDMP.train(mj_demo.t, mj_demo.y)


@pytest.fixture(scope="session")
def cls_model(mj_demo):
    return ClassicalDMP.train(mj_demo)


@pytest.fixture(scope="session")
def planar_demo():
    return sigmoid_arcs_demo(2.0, DT)


@pytest.fixture(scope="session")
def planar_model(planar_demo):
    return ReversibleDMP.train(planar_demo.t, planar_demo.y)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

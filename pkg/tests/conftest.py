import numpy as np
import pytest

from qpseries.model import Problem

PHI = (1 + np.sqrt(5.0)) / 2
COS1 = {(1,): 0.5, (-1,): 0.5}


def make_e1(eps=0.05):
    return Problem.build([1.0], COS1, [0.0, 1.0, 1.0], 0.0, eps)


def make_e2(eps=0.05):
    f = {(1, 0): 0.5, (-1, 0): 0.5, (0, 1): 0.5, (0, -1): 0.5}
    return Problem.build([1.0, PHI], f, [0.0, 1.0, 0.0, 1.0], 0.0, eps)


def make_e3(eps=0.05):
    return Problem.build([1.0], COS1, [0.0, 0.0, 0.0, 1.0], 0.0, eps)


@pytest.fixture
def e1():
    return make_e1()


@pytest.fixture
def e2():
    return make_e2()


@pytest.fixture
def e3():
    return make_e3()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)

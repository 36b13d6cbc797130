import numpy as np
import pytest

from dissmlr.core import validate_matrix

ACCEPTANCE_LINES = []


@pytest.fixture
def D3():
    # squared distances of points 0, 1, 2 on a line
    return validate_matrix([[0, 1, 4], [1, 0, 1], [4, 1, 0]])


@pytest.fixture
def D4_points():
    return np.array([0.0, 1.0, 5.0, 6.0])


@pytest.fixture
def D4(D4_points):
    p = D4_points
    return validate_matrix((p[:, None] - p[None, :]) ** 2)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

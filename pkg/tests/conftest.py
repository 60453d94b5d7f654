import math

import numpy as np
import pytest

from metastable_epi.graph_core import SimpleGraph


def path_graph(n):
    return SimpleGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def within_se(values, target, k=3.0):
    """``|mean - target| <= k * standard error``; returns ``(ok, mean, se)``."""
    values = np.asarray(values, dtype=np.float64)
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(values.size))
    return abs(mean - target) <= k * se, mean, se


@pytest.fixture
def edge():
    return path_graph(2)


@pytest.fixture
def path3():
    return path_graph(3)


@pytest.fixture
def path5():
    return path_graph(5)


#: One "criterion N: PASS|FAIL ..." line per acceptance criterion run.
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])

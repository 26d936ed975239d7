import numpy as np
import pytest

from consensus_bounds.netgraph import Network, random_network


def ring(n: int) -> Network:
    a = np.zeros((n, n))
    for i in range(n):
        a[i, (i + 1) % n] = 1.0
    return Network(a)


def pair() -> Network:
    return Network(np.array([[0.0, 1.0], [1.0, 0.0]]))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def net12():
    return random_network(12, 2, 0.2, seed=12)


@pytest.fixture(scope="session")
def net30():
    return random_network(30, 2, 0.2, seed=30)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)

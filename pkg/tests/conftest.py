import numpy as np
import pytest

from andersonlab.disorder import DisorderSpec
from andersonlab.lattice import Box

ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def uniform():
    return DisorderSpec.uniform(0.0, 1.0)


@pytest.fixture
def free():
    return DisorderSpec.constant(0.0)


@pytest.fixture
def pair_boxes():
    """Two 6-site segments at distance 4."""
    return Box.cube(1, 6), Box.cube(1, 6, [9])


def path_eigs(L):
    """Closed-form spectrum of the free Dirichlet path with L sites."""
    k = np.arange(1, L + 1)
    return np.sort(2 - 2 * np.cos(k * np.pi / (L + 1)))

import numpy as np
import pytest

from psept.polar_grid import PolarGrid, PolarImage


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_polar(rng, n_r, n_theta, complex_=False):
    grid = PolarGrid(n_r, n_theta)
    g = rng.standard_normal(grid.shape)
    if complex_:
        g = g + 1j * rng.standard_normal(grid.shape)
    return PolarImage(grid, g)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import ACCEPTANCE
    except ImportError:
        return
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[num])

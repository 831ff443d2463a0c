import numpy as np
import pytest

from thermal_arealaw.lattice import Statistics, Window
from thermal_arealaw.potential import kitaev, tfim, xxz


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


MODELS = {
    "tfim": lambda: tfim(1.0, 1.0),
    "xxz": lambda: xxz(1.0, 0.5, 0.3),
    "kitaev": lambda: kitaev(1.0, 1.0, 0.5),
}


def window_for(phi, n, lo=0):
    return Window(lo, lo + n - 1, phi.statistics)


def fermion_window(n, lo=0):
    return Window(lo, lo + n - 1, Statistics.FERMION)


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)

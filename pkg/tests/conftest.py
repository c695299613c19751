import numpy as np
import pytest

from sbi_radial import make_uniform_grid
from sbi_radial.profiles import corpus

# acceptance criteria record their verdicts here; printed at the end of the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def grid():
    return make_uniform_grid(30.0, 4096)


@pytest.fixture(scope="session")
def coarse_grid():
    return make_uniform_grid(30.0, 1024)


@pytest.fixture(scope="session")
def field_corpus(grid):
    return corpus(grid, ("gaussian", "piecewise", "ring", "two_bump"))


@pytest.fixture(scope="session")
def gaussian_u(grid):
    return corpus(grid, ("gaussian",))["gaussian"]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, msg = ACCEPTANCE[k]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {k:2d}: {msg}")


def rel(a, b):
    return abs(a - b) / abs(b)


np.seterr(all="raise", under="ignore")

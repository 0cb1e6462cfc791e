import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qcontrol.geometry import build_cutoff, control_region_bump
from qcontrol.hum import HumProblem
from qcontrol.spectral import Field, make_grid

settings.register_profile(
    "default", deadline=None, max_examples=30, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def desk_grid():
    return make_grid(1, 64, 8.0)


@pytest.fixture(scope="session")
def desk_phi(desk_grid):
    return build_cutoff(desk_grid, 2.0)


@pytest.fixture(scope="session")
def desk_problem(desk_grid, desk_phi):
    u0 = control_region_bump(desk_grid, 2.0, 1.0)
    return HumProblem(desk_grid, desk_phi, 2.0, 256, u0)


@pytest.fixture(scope="session")
def small_problem():
    grid = make_grid(1, 32, 8.0)
    return HumProblem(grid, build_cutoff(grid, 2.0), 2.0, 128, control_region_bump(grid, 2.0, 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_field(grid, rng, scale=1.0):
    vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return Field(grid, scale * vals)


ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

from __future__ import annotations

import numpy as np
import pytest

from dualweno.boundary import BoundaryConditions
from dualweno.mesh import StaggeredGrid2D, build_uniform_mesh


def periodic_grid(nx: int, nz: int, lx: float = 1.0, lz: float = 1.0) -> StaggeredGrid2D:
    return StaggeredGrid2D(build_uniform_mesh(nx, 0.0, lx, periodic=True),
                           build_uniform_mesh(nz, 0.0, lz, periodic=True))


def channel_grid(nx: int, nz: int, lx: float = 1.0, lz: float = 1.0) -> StaggeredGrid2D:
    """Periodic in x, walls in z."""
    return StaggeredGrid2D(build_uniform_mesh(nx, 0.0, lx, periodic=True),
                           build_uniform_mesh(nz, 0.0, lz))


ALL_PERIODIC = BoundaryConditions.from_dict(
    {"left": "periodic", "right": "periodic", "bottom": "periodic", "top": "periodic"})
CHANNEL_VELOCITY = BoundaryConditions.from_dict(
    {"left": "periodic", "right": "periodic", "bottom": "free-slip", "top": "free-slip"})


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# (criterion number, verdict line) pairs filled in by the acceptance suite
ACCEPTANCE_LINES: list[tuple[int, str]] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

import math

import numpy as np
import pytest

from kslab.geometry import build_radial_grid
from kslab.steady import BoundaryCondition, ProblemSpec, continue_branch

NEUMANN = BoundaryCondition.NEUMANN
DIRICHLET = BoundaryCondition.DIRICHLET


@pytest.fixture(scope="session")
def grid():
    return build_radial_grid(201)


@pytest.fixture(scope="session")
def neumann_branch(grid):
    """Upper half of the first nonconstant Neumann branch at beta = 1."""
    spec = ProblemSpec(1.0, 60.0, NEUMANN, grid)
    return continue_branch(spec, (1.0, 200.0), ds=1.0, side=1)


@pytest.fixture(scope="session")
def lower_branch(grid):
    spec = ProblemSpec(1.0, 60.0, NEUMANN, grid)
    return continue_branch(spec, (1.0, 200.0), ds=1.0, side=-1)


@pytest.fixture(scope="session")
def branch_samples(neumann_branch):
    sols = neumann_branch.solutions
    idx = np.linspace(1, len(sols) - 1, 5).astype(int)
    return [sols[i] for i in idx]


def pytest_report_header(config):
    return f"8 pi = {8 * math.pi:.12f}"


def pytest_terminal_summary(terminalreporter):
    from .test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])

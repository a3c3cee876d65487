import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from plap import GridSpec, PoleSet, ScalarField, Solution, SolverConfig, solve


def synthetic_solution(grid, values, tolerance=1e-6):
    """Wrap an analytic field as a converged Solution for diagnostics tests."""
    return Solution(
        field=ScalarField(np.asarray(values, dtype=float), grid),
        iterations=0,
        final_residual=0.0,
        energy=0.0,
        converged=True,
        tolerance=tolerance,
    )


def fig1_poles(k=4, ell=4):
    return PoleSet.with_values(GridSpec(ell, k), [(0, 1), (0, -1)], [1.0, -1.0], 4.0)


@pytest.fixture(scope="session")
def fig1():
    poles = fig1_poles(4)
    return solve(SolverConfig(poles, record_history=True)), poles


@pytest.fixture(scope="session")
def fig1_fine():
    poles = fig1_poles(8)
    return solve(SolverConfig(poles)), poles


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

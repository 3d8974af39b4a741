"""Shared fixtures: a reduced grid, seeded smooth fields and cached ground states."""

from collections.abc import Callable

import numpy as np
import pytest

from relhartree.expansion import ExpansionSeries, build_action_expansion, build_energy_expansion
from relhartree.ground_state import GroundStateResult, solve_action, solve_energy
from relhartree.models import PhysicalParams, SolverOptions
from relhartree.radial_core import RadialField, RadialGrid, resample

SMALL_N = 1023
SMALL_RADIUS = 24.0

# Tight enough that sweep residuals stay well above the noise floor
TIGHT = SolverOptions(tol=1e-12, residual_tol=1e-10)


def smooth_field(grid: RadialGrid, rng: np.random.Generator, terms: int = 3) -> RadialField:
    """Sum of (1 + b r^2) exp(-r^2 / 2w^2) bumps with random b, w and amplitudes."""
    r = grid.nodes
    values = np.zeros(grid.n)
    for _ in range(terms):
        width = rng.uniform(0.7, 2.5)
        amplitude = rng.uniform(-1.0, 1.0)
        b = rng.uniform(0.0, 0.5)
        values += amplitude * (1.0 + b * r * r) * np.exp(-(r * r) / (2.0 * width * width))
    return RadialField(grid, values)


@pytest.fixture(scope="session")
def grid() -> RadialGrid:
    """Reduced grid used by unit and integration tests."""
    return RadialGrid(SMALL_N, SMALL_RADIUS)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260117)


@pytest.fixture
def random_field(grid: RadialGrid, rng: np.random.Generator) -> Callable[[], RadialField]:
    """Factory of seeded smooth fields on the reduced grid."""

    def make() -> RadialField:
        return smooth_field(grid, rng)

    return make


@pytest.fixture(scope="session")
def limit_energy(grid: RadialGrid) -> GroundStateResult:
    """Unit-mass limit energy ground state (m = 1)."""
    return solve_energy(PhysicalParams(), grid, TIGHT)


@pytest.fixture(scope="session")
def limit_action(grid: RadialGrid) -> GroundStateResult:
    """Limit action ground state (m = 1, lambda = 1)."""
    return solve_action(PhysicalParams(lam=1.0), grid, TIGHT)


@pytest.fixture(scope="session")
def energy_series(limit_energy: GroundStateResult) -> ExpansionSeries:
    return build_energy_expansion(limit_energy, 2)


@pytest.fixture(scope="session")
def action_series(limit_action: GroundStateResult) -> ExpansionSeries:
    return build_action_expansion(limit_action, 2)


@pytest.fixture(scope="session")
def fine_grid(grid: RadialGrid) -> RadialGrid:
    """The reduced grid with dr halved; every second node is a node of the reduced grid."""
    return grid.refined(2)


@pytest.fixture(scope="session")
def fine_limit_energy(fine_grid: RadialGrid, limit_energy: GroundStateResult) -> GroundStateResult:
    initial = resample(limit_energy.profile, fine_grid)
    return solve_energy(PhysicalParams(), fine_grid, TIGHT, initial)


@pytest.fixture(scope="session")
def fine_limit_action(fine_grid: RadialGrid, limit_action: GroundStateResult) -> GroundStateResult:
    return solve_action(
        PhysicalParams(lam=1.0), fine_grid, TIGHT, resample(limit_action.profile, fine_grid)
    )

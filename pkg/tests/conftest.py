import numpy as np
import pytest

from wfgibbs import (
    GridSpec,
    Harmonic,
    ModelParams,
    QuarticDoubleWell,
    build_two_state,
    effective_potential,
)

# Reference doublet values for the quartic double well with hbar = 1,
# w0 = 1, x0 = 1.5 (independent high-accuracy eigensolves; these are the
# regression targets for the default grid).
DOUBLE_WELL_REFERENCE = {
    0.2: {"e1": 3.415753, "e2": 4.877688, "d": 1.158335},
    0.5: {"e1": 2.582908, "e2": 2.865508, "d": 1.268715},
    1.0: {"e1": 1.970442, "e2": 2.012262, "d": 1.353385},
    1.5: {"e1": 1.64383345, "e2": 1.65329839, "d": 1.38670188},
}

DOUBLE_WELL_MASSES = sorted(DOUBLE_WELL_REFERENCE)


def double_well(mass: float) -> ModelParams:
    return ModelParams(mass, 1.0, QuarticDoubleWell(1.0, 1.5))


def harmonic(mass: float = 1.0, omega: float = 1.0) -> ModelParams:
    return ModelParams(mass, 1.0, Harmonic(omega))


@pytest.fixture(scope="session")
def dw_grid():
    return GridSpec(-6.0, 6.0, 4001)


@pytest.fixture(scope="session")
def two_state_models(dw_grid):
    """Lowest-doublet reductions for the four reference masses."""
    return {m: build_two_state(double_well(m), dw_grid) for m in DOUBLE_WELL_MASSES}


@pytest.fixture(scope="session")
def dw_tables(two_state_models, dw_grid):
    """Exact effective-potential tables on |q/d| <= 0.995, 41 points."""
    tables = {}
    for m, ts in two_state_models.items():
        q = np.linspace(-0.995 * ts.d, 0.995 * ts.d, 41)
        tables[m] = effective_potential(double_well(m), q, grid=dw_grid)
    return tables


@pytest.fixture(scope="session")
def harmonic_grid():
    return GridSpec(-10.0, 10.0, 4001)

"""Statistics of quantum expectation values under Gibbs ensembles over
normalized wave functions: constrained ground states, effective potentials,
low-temperature fluctuation curves, and direct Monte Carlo sampling on a
truncated eigenbasis."""

from .constrain import (
    CoherentState,
    ConstrainedState,
    EffectivePotentialTable,
    coherent_state,
    default_grid,
    effective_potential,
    fig_q_grid,
    harmonic_qp_density,
    solve_lambda,
    tilted_ground_state,
)
from .errors import (
    ConfigurationError,
    CoverageError,
    SolverError,
    TruncationError,
    UnreachableTargetError,
    UsageError,
    ValidationFailure,
    WfGibbsError,
)
from .lattice import (
    GridSpec,
    Harmonic,
    ModelParams,
    Polynomial,
    PotentialSpec,
    QuarticDoubleWell,
    Tilted,
    TridiagonalOperator,
    assemble_hamiltonian,
    energy_expectation,
    eval_potential,
    inner_product,
    make_grid,
    momentum_expectation,
    position_element,
    tilt_hamiltonian,
)
from .sampling import (
    ChainConfig,
    SampleRun,
    TruncatedModel,
    build_truncated_model,
    integrated_autocorrelation,
    oracle_two_level,
    sample_ensemble,
    unitary_flow_check,
)
from .spectra import EigenPair, lowest_eigenpairs, parity_of
from .thermal import (
    CanonicalAtoms,
    ThermalCurve,
    canonical_atoms,
    default_temperature_grid,
    fluctuation_curve,
    position_marginal,
    required_q_range,
    table_for_betas,
)
from .twostate import (
    DomainError,
    TwoStateModel,
    build_two_state,
    rescale,
    two_state_coefficients,
    two_state_coherent,
    two_state_lambda,
    two_state_table,
    two_state_veff,
)

__version__ = "0.1.0"

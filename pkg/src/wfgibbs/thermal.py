"""Thermal statistics of expectation values.

The low-temperature density of (<q>, <p>) factorizes into a Gaussian
momentum marginal with variance m/beta and a position marginal
proportional to exp(-beta V_eff(q)). This module computes moments and
fluctuation curves from an effective-potential table, and the canonical
ensemble comparator whose position distribution is a sum of point atoms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constrain import EffectivePotentialTable, default_grid, effective_potential
from .errors import CoverageError, TruncationError, UsageError
from .lattice import GridSpec, ModelParams, assemble_hamiltonian, eval_potential, position_element
from .spectra import lowest_eigenpairs

BOUNDARY_TAIL = 1e-8  # coverage criterion: tail density / peak density


@dataclass(frozen=True)
class ThermalCurve:
    """Fluctuations of <q> versus temperature, with rescaled axes."""

    beta: np.ndarray
    rescaled_temperature: np.ndarray
    mean_q: np.ndarray
    delta_q: np.ndarray
    delta_q_over_d: np.ndarray
    delta_p: np.ndarray


@dataclass(frozen=True)
class CanonicalAtoms:
    """Point atoms (weight, q_k) of the canonical expectation distribution."""

    weights: np.ndarray
    positions: np.ndarray
    z: float

    def dispersion(self) -> float:
        mean = float(np.sum(self.weights * self.positions))
        second = float(np.sum(self.weights * self.positions**2))
        return float(np.sqrt(max(second - mean**2, 0.0)))


def _fine_marginal(table: EffectivePotentialTable, beta: float, n_fine: int):
    """Unnormalized density exp(-beta (V_eff - min)) on a refined grid.

    Interpolation is piecewise-linear in V_eff, not in the density, which
    preserves convexity and positivity.
    """
    if len(table.q) < 2:
        raise UsageError("effective-potential table needs at least two points")
    qq = np.linspace(table.q[0], table.q[-1], n_fine)
    v = table.interpolate(qq)
    dens = np.exp(-beta * (v - v.min()))
    return qq, dens


def position_marginal(table: EffectivePotentialTable, beta: float,
                      n_fine: int = 4001):
    """Normalized marginal density of <q> on the table's range."""
    if beta <= 0:
        raise UsageError(f"beta must be positive, got {beta}")
    qq, dens = _fine_marginal(table, beta, n_fine)
    dens = dens / np.trapezoid(dens, qq)
    return qq, dens


def _check_coverage(table, beta, qq, dens):
    if table.bounded_support:
        return
    tail = max(dens[0], dens[-1]) / dens.max()
    if tail > BOUNDARY_TAIL:
        raise CoverageError(
            f"table range [{qq[0]}, {qq[-1]}] too narrow at beta={beta}: "
            f"boundary density {tail:.2e} of peak exceeds {BOUNDARY_TAIL}",
            beta=beta,
        )


def fluctuation_curve(table: EffectivePotentialTable, betas,
                      n_fine: int = 4001) -> ThermalCurve:
    """Mean and dispersion of <q> at each beta, by trapezoid quadrature.

    The Gaussian momentum dispersion sqrt(m/beta) is reported alongside.
    Raises CoverageError naming the offending beta when the table does not
    contain the thermally relevant range (skipped for tables with
    intrinsically bounded support, e.g. the two-state arc on [-d, d]).
    """
    betas = np.asarray(betas, dtype=float)
    meta = table.meta
    mass = meta["model"]["mass"]
    splitting = meta["e2"] - meta["e1"]
    d = meta["d"]

    mean_q, delta_q = [], []
    for beta in betas:
        qq, dens = _fine_marginal(table, beta, n_fine)
        _check_coverage(table, beta, qq, dens)
        norm = np.trapezoid(dens, qq)
        m1 = np.trapezoid(dens * qq, qq) / norm
        m2 = np.trapezoid(dens * qq**2, qq) / norm
        mean_q.append(m1)
        delta_q.append(np.sqrt(max(m2 - m1**2, 0.0)))

    mean_q = np.asarray(mean_q)
    delta_q = np.asarray(delta_q)
    return ThermalCurve(
        beta=betas,
        rescaled_temperature=2.0 / (betas * splitting),
        mean_q=mean_q,
        delta_q=delta_q,
        delta_q_over_d=delta_q / d,
        delta_p=np.sqrt(mass / betas),
    )


def default_temperature_grid(n: int = 60, t_min: float = 1e-2,
                             t_max: float = 1e2) -> np.ndarray:
    """Log-spaced rescaled temperatures exposing both asymptotes."""
    return np.logspace(np.log10(t_min), np.log10(t_max), n)


def required_q_range(mp: ModelParams, beta: float, margin: float = 25.0) -> float:
    """Half-range where exp(-beta V) drops below the coverage criterion.

    Uses the bare potential as a proxy for V_eff (they agree far from the
    wells, where the ground state of the tilted problem is semiclassical).
    """
    target = margin / beta
    lo, hi = 0.0, 1.0
    v0 = float(np.min(eval_potential(mp.potential, np.linspace(-hi, hi, 101), mp.mass)))
    while float(eval_potential(mp.potential, hi, mp.mass)) - v0 < target:
        hi *= 2.0
        if hi > 1e6:
            raise CoverageError(f"potential too flat to cover beta={beta}", beta=beta)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if float(eval_potential(mp.potential, mid, mp.mass)) - v0 < target:
            lo = mid
        else:
            hi = mid
    return hi


def table_for_betas(mp: ModelParams, betas, n_q: int = 161,
                    grid: GridSpec | None = None) -> EffectivePotentialTable:
    """Effective-potential table wide enough for every requested beta.

    Extends the spatial grid together with the q range so the tilted
    ground states stay away from the hard walls.
    """
    q_max = max(required_q_range(mp, float(b)) for b in np.atleast_1d(betas))
    base = grid or default_grid(mp)
    half = max(base.x_max, q_max + 4.0)
    n_points = int(np.ceil((base.n_points - 1) * half / base.x_max)) + 1
    wide = GridSpec(-half, half, n_points)
    return effective_potential(mp, np.linspace(-q_max, q_max, n_q), grid=wide)


def canonical_atoms(mp: ModelParams, beta: float, k_max: int,
                    grid: GridSpec | None = None) -> CanonicalAtoms:
    """Boltzmann-weighted atoms (e^(-beta E_k)/Z, <phi_k, q phi_k>).

    Requires e^(-beta (E_kmax - E_1)) < 1e-10 so the truncation remainder
    is negligible.
    """
    if k_max < 1:
        raise UsageError(f"k_max must be >= 1, got {k_max}")
    if beta <= 0:
        raise UsageError(f"beta must be positive, got {beta}")
    grid = grid or default_grid(mp)
    op = assemble_hamiltonian(mp, grid)
    pairs = lowest_eigenpairs(op, k_max)
    energies = np.array([p.energy for p in pairs])
    rel = np.exp(-beta * (energies - energies[0]))
    if rel[-1] >= 1e-10:
        raise TruncationError(
            f"k_max={k_max} too small at beta={beta}: top-level weight "
            f"{rel[-1]:.2e} >= 1e-10; increase k_max"
        )
    weights = rel / rel.sum()
    positions = np.array(
        [position_element(p.wavefunction, p.wavefunction, grid) for p in pairs]
    )
    z = float(np.exp(-beta * energies[0]) * rel.sum())
    return CanonicalAtoms(weights, positions, z)

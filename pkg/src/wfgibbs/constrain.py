"""Constrained ground states and the effective potential.

For a target position expectation q the ground state of the tilted
Hamiltonian H + lambda*q is solved self-consistently: the multiplier
lambda(q) is the root of g(lambda) = <phi_lambda, q phi_lambda> - q, which
is strictly decreasing in lambda. The effective potential is

    V_eff(q) = E0_lambda(q) - lambda(q) * q,

a Legendre-type transform of the concave map lambda -> E0_lambda; it is
convex with dV_eff/dq = -lambda(q). Generalized coherent states are
exp(i p x / hbar) * phi_lambda(q)(x).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SolverError, UnreachableTargetError, UsageError
from .lattice import (
    GridSpec,
    Harmonic,
    ModelParams,
    QuarticDoubleWell,
    TridiagonalOperator,
    assemble_hamiltonian,
    energy_expectation,
    eval_potential,
    make_grid,
    position_element,
    tilt_hamiltonian,
    trapezoid_weights,
)
from .spectra import EigenPair, lowest_eigenpairs

DEFAULT_ROOT_TOL_SCALE = 1e-8
MAX_BRACKET_DOUBLINGS = 60
MAX_BISECTIONS = 200

CSV_SCHEMA_HEADER = "# wfgibbs-csv v1"


def default_grid(mp: ModelParams) -> GridSpec:
    """Grid wide and fine enough for the low-lying states of the model.

    For the quartic double well with x0 = 1.5 this is [-6, 6] with 4001
    points; wavefunction tails there are below 1e-12 for all studied masses.
    """
    pot = mp.potential
    if isinstance(pot, QuarticDoubleWell):
        half = max(6.0, 4.0 * pot.x0)
    elif isinstance(pot, Harmonic):
        half = 10.0
    else:
        half = 10.0
    return GridSpec(-half, half, 4001)


@dataclass(frozen=True)
class ConstrainedState:
    """Self-consistent record (q, lambda(q), ground energy, wavefunction)."""

    q_target: float
    lam: float
    ground_energy: float
    v_eff: float
    wavefunction: np.ndarray
    constraint_residual: float


@dataclass(frozen=True)
class CoherentState:
    q: float
    p: float
    psi: np.ndarray


@dataclass
class EffectivePotentialTable:
    """Sampled V_eff(q) with the doublet metadata used for rescaling."""

    q: np.ndarray
    v_eff: np.ndarray
    lam: np.ndarray
    meta: dict = field(default_factory=dict)
    bounded_support: bool = False

    def interpolate(self, qq):
        """Piecewise-linear V_eff between table nodes."""
        return np.interp(qq, self.q, self.v_eff)

    def save(self, csv_path) -> None:
        """Write (q, v_eff, lambda) CSV plus a JSON metadata sidecar."""
        csv_path = Path(csv_path)
        with open(csv_path, "w", newline="") as fh:
            fh.write(CSV_SCHEMA_HEADER + "\n")
            fh.write("# columns: q,v_eff,lambda\n")
            writer = csv.writer(fh)
            for qi, vi, li in zip(self.q, self.v_eff, self.lam):
                writer.writerow([f"{qi:.17g}", f"{vi:.17g}", f"{li:.17g}"])
        sidecar = csv_path.with_suffix(".json")
        with open(sidecar, "w") as fh:
            json.dump(
                {"meta": self.meta, "bounded_support": self.bounded_support},
                fh,
                indent=2,
                default=float,
            )

    @staticmethod
    def load(csv_path) -> "EffectivePotentialTable":
        csv_path = Path(csv_path)
        rows = []
        with open(csv_path) as fh:
            for line in fh:
                if line.startswith("#"):
                    continue
                rows.append([float(v) for v in line.strip().split(",")])
        data = np.asarray(rows)
        sidecar = csv_path.with_suffix(".json")
        meta, bounded = {}, False
        if sidecar.exists():
            with open(sidecar) as fh:
                blob = json.load(fh)
            meta = blob.get("meta", {})
            bounded = blob.get("bounded_support", False)
        return EffectivePotentialTable(data[:, 0], data[:, 1], data[:, 2], meta, bounded)


def tilted_ground_state(mp: ModelParams, lam: float, grid: GridSpec | None = None,
                        op: TridiagonalOperator | None = None) -> EigenPair:
    """Ground eigenpair of H + lam * q."""
    if not np.isfinite(lam):
        raise UsageError(f"tilt must be finite, got {lam}")
    if op is None:
        op = assemble_hamiltonian(mp, grid or default_grid(mp))
    return lowest_eigenpairs(tilt_hamiltonian(op, lam), 1)[0]


def _curvature_estimate(mp: ModelParams, grid: GridSpec) -> float:
    """Second difference of V at its grid minimum; scales the lambda bracket."""
    x, dx = make_grid(grid)
    v = eval_potential(mp.potential, x, mp.mass)
    i = int(np.argmin(v[1:-1])) + 1
    vpp = (v[i - 1] - 2 * v[i] + v[i + 1]) / dx**2
    return max(vpp, 1e-3)


def solve_lambda(mp: ModelParams, q_target: float, grid: GridSpec | None = None,
                 tol: float | None = None, bracket_center: float | None = None,
                 op: TridiagonalOperator | None = None) -> ConstrainedState:
    """Find lambda such that the tilted ground state has <q> = q_target.

    Bracketing bisection with geometric bracket expansion; g(lambda) is
    strictly decreasing, which makes bisection unconditionally convergent.
    Newton is deliberately avoided: g is extremely steep near lambda = 0
    when the tunneling splitting is small.
    """
    grid = grid or default_grid(mp)
    if op is None:
        op = assemble_hamiltonian(mp, grid)
    if tol is None:
        tol = DEFAULT_ROOT_TOL_SCALE * max(1.0, abs(q_target))

    def ground(lam):
        pair = lowest_eigenpairs(tilt_hamiltonian(op, lam), 1)[0]
        return pair, position_element(pair.wavefunction, pair.wavefunction, grid)

    # symmetric potential at q = 0: lambda = 0 by parity, skip the stiff
    # root-finding region entirely
    if q_target == 0.0 and mp.potential.is_symmetric:
        pair, q0 = ground(0.0)
        return ConstrainedState(0.0, 0.0, pair.energy, pair.energy,
                                pair.wavefunction, abs(q0))

    if bracket_center is None:
        bracket_center = -_curvature_estimate(mp, grid) * q_target
    width = max(1.0, 0.1 * abs(bracket_center))
    lo, hi = bracket_center - width, bracket_center + width

    pair_lo, q_lo = ground(lo)
    pair_hi, q_hi = ground(hi)
    doublings = 0
    # need g(lo) >= 0 >= g(hi); g decreases in lambda
    while q_lo - q_target < 0 or q_hi - q_target > 0:
        if doublings >= MAX_BRACKET_DOUBLINGS:
            raise UnreachableTargetError(
                f"q_target={q_target} not bracketed after "
                f"{MAX_BRACKET_DOUBLINGS} doublings (grid too narrow?)",
                residual=min(abs(q_lo - q_target), abs(q_hi - q_target)),
            )
        if q_lo - q_target < 0:
            lo -= width
            pair_lo, q_lo = ground(lo)
        if q_hi - q_target > 0:
            hi += width
            pair_hi, q_hi = ground(hi)
        width *= 2.0
        doublings += 1

    best = (abs(q_lo - q_target), lo, pair_lo, q_lo)
    if abs(q_hi - q_target) < best[0]:
        best = (abs(q_hi - q_target), hi, pair_hi, q_hi)
    for _ in range(MAX_BISECTIONS):
        if best[0] <= tol:
            break
        mid = 0.5 * (lo + hi)
        pair, q_mid = ground(mid)
        g = q_mid - q_target
        if abs(g) < best[0]:
            best = (abs(g), mid, pair, q_mid)
        if g > 0:
            lo = mid
        else:
            hi = mid
    else:
        raise SolverError(
            f"lambda bisection did not reach tol={tol} for q_target={q_target}",
            residual=best[0],
        )

    resid, lam, pair, _ = best
    return ConstrainedState(q_target, lam, pair.energy,
                            pair.energy - lam * q_target, pair.wavefunction, resid)


def effective_potential(mp: ModelParams, q_grid, grid: GridSpec | None = None,
                        tol: float | None = None) -> EffectivePotentialTable:
    """Tabulate V_eff over an ascending q grid.

    The multiplier found at each point seeds the bracket for the next
    (continuation). Points whose solve fails are recorded in the metadata
    and excluded from the table.
    """
    q_grid = np.asarray(q_grid, dtype=float)
    if len(q_grid) == 0:
        raise UsageError("empty q grid")
    if np.any(np.diff(q_grid) <= 0):
        raise UsageError("q grid must be strictly ascending")
    grid = grid or default_grid(mp)
    op = assemble_hamiltonian(mp, grid)

    pairs = lowest_eigenpairs(op, 2)
    e1, e2 = pairs[0].energy, pairs[1].energy
    d = abs(position_element(pairs[0].wavefunction, pairs[1].wavefunction, grid))

    qs, vs, ls, failed = [], [], [], []
    prev_lam = None
    for qt in q_grid:
        try:
            cs = solve_lambda(mp, qt, grid=grid, tol=tol,
                              bracket_center=prev_lam, op=op)
        except SolverError as exc:
            failed.append({"q": float(qt), "error": str(exc)})
            continue
        prev_lam = cs.lam
        qs.append(cs.q_target)
        vs.append(cs.v_eff)
        ls.append(cs.lam)

    meta = {
        "e1": e1,
        "e2": e2,
        "d": d,
        "model": mp.to_dict(),
        "grid": grid.to_dict(),
        "root_tol_scale": tol if tol is not None else DEFAULT_ROOT_TOL_SCALE,
        "failed_points": failed,
    }
    return EffectivePotentialTable(np.asarray(qs), np.asarray(vs), np.asarray(ls), meta)


def fig_q_grid(d: float, n: int = 81, frac: float = 0.995) -> np.ndarray:
    """Default q grid for the rescaled-potential comparison: |q/d| <= frac."""
    return np.linspace(-frac * d, frac * d, n)


def coherent_state(cs: ConstrainedState, p: float, mp: ModelParams,
                   grid: GridSpec) -> CoherentState:
    """exp(i p x / hbar) times the constrained ground state."""
    x, _ = make_grid(grid)
    psi = np.exp(1j * p * x / mp.hbar) * cs.wavefunction
    return CoherentState(cs.q_target, p, psi)


def harmonic_qp_density(m: float, omega: float, hbar: float, beta: float,
                        q, p):
    """Exact density of (<q>, <p>) for the harmonic oscillator.

    P(q, p) = (beta omega / 2 pi) exp[-beta (p^2/2m + m omega^2 q^2 / 2)].
    Independent of hbar; the argument is kept for signature uniformity.
    """
    if beta <= 0:
        raise UsageError(f"beta must be positive, got {beta}")
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    e = p**2 / (2.0 * m) + 0.5 * m * omega**2 * q**2
    return beta * omega / (2.0 * np.pi) * np.exp(-beta * e)

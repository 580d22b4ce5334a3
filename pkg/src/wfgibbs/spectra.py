"""Lowest eigenpairs of real symmetric tridiagonal operators.

Eigenvalues are located by bisection on Sturm sequence counts and the
eigenvectors by inverse iteration with deflation inside near-degenerate
clusters (LAPACK stebz/stein via scipy.linalg.eigh_tridiagonal). This
resolves tunneling doublets whose splitting is many orders of magnitude
below the eigenvalue scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import SolverError, UsageError
from .lattice import GridSpec, TridiagonalOperator, trapezoid_weights

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class EigenPair:
    """Energy and grid wavefunction, normalized with trapezoid weights.

    Sign convention: the first component exceeding 1e-8 in magnitude is
    positive.
    """

    energy: float
    wavefunction: np.ndarray
    residual: float


def _fix_sign(vec: np.ndarray) -> np.ndarray:
    nz = np.nonzero(np.abs(vec) > 1e-8)[0]
    if len(nz) and vec[nz[0]] < 0:
        return -vec
    return vec


def lowest_eigenpairs(op: TridiagonalOperator, k: int, tol: float = DEFAULT_TOL):
    """Return the k lowest eigenpairs in ascending order.

    Raises SolverError if any residual ||H phi - E phi|| exceeds
    tol * max(1, ||H||).
    """
    if k < 1 or k > op.n:
        raise UsageError(f"k={k} outside [1, {op.n}]")
    if tol <= 0:
        raise UsageError(f"tol must be positive, got {tol}")
    try:
        energies, vectors = eigh_tridiagonal(
            op.diagonal, op.off_diagonal, select="i", select_range=(0, k - 1)
        )
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise SolverError(f"tridiagonal eigensolve failed: {exc}") from exc

    dx = op.grid.dx
    bound = tol * max(1.0, op.norm_estimate)
    pairs = []
    for i in range(k):
        vec = vectors[:, i]
        resid = float(np.linalg.norm(op.apply(vec) - energies[i] * vec))
        if resid > bound:
            raise SolverError(
                f"eigenpair {i} residual {resid:.3e} exceeds bound {bound:.3e}",
                residual=resid,
            )
        phi = _fix_sign(vec / np.sqrt(dx))
        # renormalize in the trapezoid norm (endpoint weights)
        norm2 = np.sum(phi * phi * trapezoid_weights(op.grid))
        phi = phi / np.sqrt(norm2)
        pairs.append(EigenPair(float(energies[i]), phi, resid))
    return pairs


def parity_of(pair: EigenPair, grid: GridSpec, tol: float = 1e-6) -> str:
    """Classify a wavefunction as 'even', 'odd', or 'none' on a symmetric grid."""
    if not grid.is_symmetric:
        raise UsageError("parity classification requires a symmetric grid")
    phi = pair.wavefunction
    if np.max(np.abs(phi - phi[::-1])) < tol:
        return "even"
    if np.max(np.abs(phi + phi[::-1])) < tol:
        return "odd"
    return "none"

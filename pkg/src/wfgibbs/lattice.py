"""Spatial discretization and one-dimensional lattice Hamiltonians.

A Hamiltonian H = p^2/2m + V(q) is discretized with second-order central
finite differences on a uniform grid with Dirichlet (hard-wall) boundaries,
giving a real symmetric tridiagonal operator. Inner products use the
trapezoid rule on the same grid, so quadrature and discretization share the
same O(dx^2) order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ConfigurationError, UsageError


@dataclass(frozen=True)
class GridSpec:
    """Uniform spatial grid on [x_min, x_max] with n_points nodes."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ConfigurationError(
                f"degenerate interval [{self.x_min}, {self.x_max}]"
            )
        if self.n_points < 3:
            raise ConfigurationError(f"n_points={self.n_points} < 3")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def is_symmetric(self) -> bool:
        return abs(self.x_min + self.x_max) < 1e-12 * (self.x_max - self.x_min)

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "n_points": self.n_points}

    @staticmethod
    def from_dict(d: dict) -> "GridSpec":
        return GridSpec(float(d["x_min"]), float(d["x_max"]), int(d["n_points"]))


def make_grid(spec: GridSpec):
    """Return (x, dx): the grid nodes and their spacing."""
    x = np.linspace(spec.x_min, spec.x_max, spec.n_points)
    return x, spec.dx


def trapezoid_weights(spec: GridSpec) -> np.ndarray:
    w = np.full(spec.n_points, spec.dx)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


# --- potentials -------------------------------------------------------------


@dataclass(frozen=True)
class Harmonic:
    """V(x) = m omega^2 x^2 / 2 (the mass enters through ModelParams)."""

    omega: float

    def __post_init__(self):
        if self.omega <= 0:
            raise ConfigurationError(f"harmonic requires omega > 0, got {self.omega}")

    is_symmetric = True

    def evaluate(self, x, mass):
        return 0.5 * mass * self.omega**2 * np.asarray(x) ** 2

    def to_dict(self):
        return {"type": "harmonic", "omega": self.omega}


@dataclass(frozen=True)
class QuarticDoubleWell:
    """V(x) = w0 (x^2 - x0^2)^2: symmetric wells at +-x0, barrier w0*x0^4."""

    w0: float
    x0: float

    def __post_init__(self):
        if self.w0 <= 0 or self.x0 <= 0:
            raise ConfigurationError(
                f"quartic double well requires w0 > 0 and x0 > 0, got "
                f"w0={self.w0}, x0={self.x0}"
            )

    is_symmetric = True

    def evaluate(self, x, mass):
        return self.w0 * (np.asarray(x) ** 2 - self.x0**2) ** 2

    def to_dict(self):
        return {"type": "quartic_double_well", "w0": self.w0, "x0": self.x0}


@dataclass(frozen=True)
class Polynomial:
    """V(x) = sum_k coefficients[k] x^k."""

    coefficients: tuple

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if len(self.coefficients) == 0:
            raise ConfigurationError("polynomial potential needs coefficients")

    @property
    def is_symmetric(self) -> bool:
        return all(c == 0.0 for c in self.coefficients[1::2])

    def evaluate(self, x, mass):
        return np.polynomial.polynomial.polyval(np.asarray(x), self.coefficients)

    def to_dict(self):
        return {"type": "polynomial", "coefficients": list(self.coefficients)}


@dataclass(frozen=True)
class Tilted:
    """base(x) + strength * x; at most one level of nesting."""

    base: Union[Harmonic, QuarticDoubleWell, Polynomial]
    strength: float

    def __post_init__(self):
        if isinstance(self.base, Tilted):
            raise ConfigurationError("tilted potentials cannot nest")

    @property
    def is_symmetric(self) -> bool:
        return self.strength == 0.0 and self.base.is_symmetric

    def evaluate(self, x, mass):
        x = np.asarray(x)
        return self.base.evaluate(x, mass) + self.strength * x

    def to_dict(self):
        return {"type": "tilted", "base": self.base.to_dict(), "strength": self.strength}


PotentialSpec = Union[Harmonic, QuarticDoubleWell, Polynomial, Tilted]

_POTENTIAL_TYPES = {
    "harmonic": lambda d: Harmonic(float(d["omega"])),
    "quartic_double_well": lambda d: QuarticDoubleWell(float(d["w0"]), float(d["x0"])),
    "polynomial": lambda d: Polynomial(tuple(d["coefficients"])),
    "tilted": lambda d: Tilted(potential_from_dict(d["base"]), float(d["strength"])),
}


def potential_from_dict(d: dict) -> PotentialSpec:
    try:
        kind = d["type"]
        factory = _POTENTIAL_TYPES[kind]
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"unknown potential spec {d!r}") from exc
    return factory(d)


def eval_potential(potential: PotentialSpec, x, mass: float = 1.0) -> np.ndarray:
    """Pointwise V(x_i). Mass only matters for the harmonic variant."""
    return potential.evaluate(x, mass)


@dataclass(frozen=True)
class ModelParams:
    """Mass, hbar, and the potential; every Hamiltonian derives from this."""

    mass: float
    hbar: float
    potential: PotentialSpec

    def __post_init__(self):
        if self.mass <= 0:
            raise ConfigurationError(f"mass must be positive, got {self.mass}")
        if self.hbar <= 0:
            raise ConfigurationError(f"hbar must be positive, got {self.hbar}")

    def to_dict(self):
        return {
            "mass": self.mass,
            "hbar": self.hbar,
            "potential": self.potential.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "ModelParams":
        return ModelParams(
            float(d["mass"]), float(d["hbar"]), potential_from_dict(d["potential"])
        )


# --- Hamiltonian assembly ---------------------------------------------------


@dataclass(frozen=True)
class TridiagonalOperator:
    """Real symmetric tridiagonal image of H on a grid."""

    diagonal: np.ndarray
    off_diagonal: np.ndarray
    grid: GridSpec

    @property
    def n(self) -> int:
        return len(self.diagonal)

    @property
    def norm_estimate(self) -> float:
        """Infinity-norm bound, used to scale residual tolerances."""
        return float(np.max(np.abs(self.diagonal)) + 2 * np.max(np.abs(self.off_diagonal)))

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Matrix-vector product H @ vec."""
        out = self.diagonal * vec
        out[:-1] += self.off_diagonal * vec[1:]
        out[1:] += self.off_diagonal * vec[:-1]
        return out


def assemble_hamiltonian(mp: ModelParams, grid: GridSpec) -> TridiagonalOperator:
    """Central-difference discretization of p^2/2m + V with hard walls."""
    x, dx = make_grid(grid)
    t = mp.hbar**2 / (2.0 * mp.mass * dx**2)
    diagonal = 2.0 * t + eval_potential(mp.potential, x, mp.mass)
    off_diagonal = np.full(grid.n_points - 1, -t)
    return TridiagonalOperator(diagonal, off_diagonal, grid)


def tilt_hamiltonian(op: TridiagonalOperator, lam: float) -> TridiagonalOperator:
    """H + lam * q, reusing the kinetic part of an assembled operator."""
    x, _ = make_grid(op.grid)
    return TridiagonalOperator(op.diagonal + lam * x, op.off_diagonal, op.grid)


# --- matrix elements --------------------------------------------------------


def _check_same_grid(a, b, grid):
    if len(a) != grid.n_points or len(b) != grid.n_points:
        raise UsageError(
            f"wavefunction length mismatch: {len(a)}, {len(b)} on grid of "
            f"{grid.n_points} points"
        )


def inner_product(a, b, grid: GridSpec) -> complex:
    """Trapezoid inner product <a, b> on the grid."""
    _check_same_grid(a, b, grid)
    return np.sum(np.conj(a) * b * trapezoid_weights(grid))


def position_element(phi_a, phi_b, grid: GridSpec) -> float:
    """<phi_a, q phi_b> with trapezoid weights.

    The quadratic form is real for real wavefunctions and for phi_a = phi_b;
    any imaginary residue beyond roundoff is rejected.
    """
    _check_same_grid(phi_a, phi_b, grid)
    x, _ = make_grid(grid)
    val = np.sum(np.conj(phi_a) * x * phi_b * trapezoid_weights(grid))
    val = complex(val)
    if abs(val.imag) > 1e-10:
        raise UsageError(f"position element has imaginary residue {val.imag}")
    return val.real


def momentum_expectation(psi, grid: GridSpec, hbar: float = 1.0) -> float:
    """<psi, p psi> with p = -i hbar d/dx (central differences).

    psi must be normalized on the grid; the imaginary residue of the
    quadratic form is verified to be below 1e-10 and discarded.
    """
    psi = np.asarray(psi)
    norm = np.real(inner_product(psi, psi, grid))
    if abs(norm - 1.0) > 1e-6:
        raise UsageError(f"momentum_expectation requires a normalized state, |psi|^2 = {norm}")
    dx = grid.dx
    # interior central differences; the Dirichlet tails make the boundary
    # contribution negligible
    deriv = np.zeros_like(psi)
    deriv[1:-1] = (psi[2:] - psi[:-2]) / (2.0 * dx)
    val = np.sum(np.conj(psi) * (-1j * hbar) * deriv) * dx
    if abs(val.imag) > 1e-10:
        raise UsageError(f"momentum expectation has imaginary residue {val.imag}")
    return float(val.real)


def energy_expectation(op: TridiagonalOperator, psi) -> float:
    """<psi, H psi> for a normalized (possibly complex) grid state."""
    psi = np.asarray(psi)
    if len(psi) != op.n:
        raise UsageError("state length does not match operator size")
    hpsi_re = op.apply(np.ascontiguousarray(psi.real))
    val = np.sum(psi.real * hpsi_re) if not np.iscomplexobj(psi) else None
    if np.iscomplexobj(psi):
        hpsi_im = op.apply(np.ascontiguousarray(psi.imag))
        val = np.sum(psi.real * hpsi_re + psi.imag * hpsi_im)
    return float(val * op.grid.dx)

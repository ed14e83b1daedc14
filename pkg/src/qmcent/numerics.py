"""Grids, quadrature and dense spectral decompositions.

Everything downstream (solvers, ensemble statistics, profiles) is built on
the conventions fixed here:

* uniform grids carrying their spacing ``dx``,
* trapezoid quadrature (plain ``sum(v) * dx`` with half-weight endpoints)
  for every integral; fields vanish at the box edges, so this matches the
  rectangle rule there while staying exact for non-decaying test fields,
* Hermitian eigendecomposition with eigenvalues sorted descending,
* Schmidt spectra of two-body fields via the Hermitian solver.

All functions are pure; nothing in this module holds mutable state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DegenerateInputError, ParameterError, PreconditionError


def quad_weights(n: int, dx: float) -> np.ndarray:
    """Quadrature weights: dx per point with half-weight endpoints."""
    w = np.full(n, dx)
    w[0] = w[-1] = 0.5 * dx
    return w


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1D grid on [x_min, x_max] with n points including endpoints."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 8:
            raise ParameterError(f"grid needs at least 8 points, got {self.n}")
        if not self.x_max > self.x_min:
            raise ParameterError(f"empty grid range [{self.x_min}, {self.x_max}]")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def points(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def weights(self) -> np.ndarray:
        return quad_weights(self.n, self.dx)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Grid1D):
            return NotImplemented
        return (self.x_min, self.x_max, self.n) == (other.x_min, other.x_max, other.n)

    def __hash__(self):
        return hash((self.x_min, self.x_max, self.n))


@dataclass(frozen=True)
class Grid2D:
    """Tensor-product grid; axis x is electron 1, axis y is electron 2."""

    gx: Grid1D
    gy: Grid1D

    @classmethod
    def square(cls, g: Grid1D) -> "Grid2D":
        return cls(gx=g, gy=g)

    @property
    def weight(self) -> float:
        """Quadrature weight of one cell, dx*dy."""
        return self.gx.dx * self.gy.dx


@dataclass
class ComplexField1D:
    """Complex amplitudes sampled on a Grid1D (units a.u.^(-1/2))."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.n,):
            raise DimensionError(
                f"field has {self.values.shape} values for a grid of {self.grid.n} points"
            )

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2 * self.grid.weights))


@dataclass
class ComplexField2D:
    """Complex amplitudes on a Grid2D, row-major: values[i, j] = psi(x_i, y_j)."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        expected = (self.grid.gx.n, self.grid.gy.n)
        if self.values.shape != expected:
            raise DimensionError(f"field shape {self.values.shape}, grid expects {expected}")

    def norm_sq(self) -> float:
        wx = self.grid.gx.weights
        wy = self.grid.gy.weights
        return float(np.sum(np.abs(self.values) ** 2 * np.outer(wx, wy)))


@dataclass(frozen=True)
class HermitianSpectrum:
    """Eigenvalues (descending) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Descending non-negative weights lambda_m with sum(lambda) = 1."""

    lambdas: np.ndarray = field(default_factory=lambda: np.array([1.0]))

    def __post_init__(self):
        object.__setattr__(self, "lambdas", np.asarray(self.lambdas, dtype=float))


def inner_product(f: ComplexField1D, g: ComplexField1D) -> complex:
    """Quadrature overlap sum_i f(i) conj(g(i)) w_i."""
    if f.grid != g.grid:
        raise DimensionError("inner_product requires both fields on the same grid")
    return complex(np.sum(f.values * np.conj(g.values) * f.grid.weights))


def normalize(f: ComplexField1D) -> ComplexField1D:
    """Rescale f to unit norm; raises on a numerically zero field."""
    nsq = f.norm_sq()
    if nsq < 1e-300:
        raise DegenerateInputError("cannot normalize a zero field")
    return ComplexField1D(grid=f.grid, values=f.values / np.sqrt(nsq))


def hermitian_eigendecompose(a: np.ndarray) -> HermitianSpectrum:
    """Eigendecompose a Hermitian matrix, eigenvalues sorted descending.

    The input is symmetrized as (A + A†)/2 first, which absorbs roundoff-level
    asymmetry; ties in degenerate blocks keep LAPACK's ordering.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise DimensionError("empty matrix")
    h = 0.5 * (a + a.conj().T)
    vals, vecs = np.linalg.eigh(h)
    order = np.arange(len(vals))[::-1]  # eigh returns ascending
    return HermitianSpectrum(eigenvalues=vals[order], eigenvectors=vecs[:, order])


def schmidt_decompose(psi: ComplexField2D, norm_tol: float = 1e-8) -> SchmidtSpectrum:
    """Schmidt weights of a normalized two-body field.

    The singular values s_m of the quadrature-weighted two-body matrix are
    obtained by eigendecomposing the Hermitian n x n product matrix and
    converted to weights lambda_m = s_m^2 / sum(s^2), so sum(lambda) = 1.
    """
    nsq = psi.norm_sq()
    if abs(nsq - 1.0) > norm_tol:
        raise PreconditionError(f"two-body field norm^2 = {nsq!r}, expected 1 within {norm_tol}")
    m = psi.values
    # quadrature-weighted two-body matrix B = sqrt(wx) psi sqrt(wy); its
    # singular values squared are the eigenvalues of B† B
    rx = np.sqrt(psi.grid.gx.weights)
    ry = np.sqrt(psi.grid.gy.weights)
    b = rx[:, None] * m * ry[None, :]
    spec = hermitian_eigendecompose(b.conj().T @ b)
    s2 = np.clip(spec.eigenvalues, 0.0, None)
    lambdas = s2 / np.sum(s2)
    return SchmidtSpectrum(lambdas=lambdas)

"""First- and second-order statistics of walker and wave ensembles.

Wave ensembles are given either as a 2D complex array of shape (M, n) with
an explicit grid spacing ``dx``, or as a sequence of ComplexField1D on a
shared grid. The central objects are the Gram matrix of pairwise overlaps
(unit trace, Hermitian PSD) and the reduced density matrix; both share the
same nonzero spectrum, which carries every entanglement measure used here:

    sigma  = sqrt(1 - ||mean wave||^2)     functional standard deviation
    S      = -sum(lambda ln lambda)        von Neumann entropy (nats)
    S_L    = 1 - sum(lambda^2)             linear entropy
    K_eff  = 1 / sum(lambda^2)             effective Schmidt number
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, EmptyDomainError, PartitionError, PreconditionError
from .numerics import (
    ComplexField1D,
    SchmidtSpectrum,
    hermitian_eigendecompose,
    quad_weights,
)

# Eigenvalues closer to zero than this are clamped before taking logs;
# anything more negative indicates a genuinely broken matrix and is not
# silently absorbed.
CLAMP_TOL = 1e-10
LOG_FLOOR = 1e-14

LN2 = math.log(2.0)


@dataclass(frozen=True)
class ClassicalStats:
    """Population mean/covariance of a point cloud; variance = trace(cov)."""

    mean: np.ndarray
    covariance: np.ndarray
    variance: float
    std: float
    count: int


@dataclass(frozen=True)
class GramMatrix:
    """Pairwise-overlap matrix G_kl = <phi_k, phi_l> / M_sel; trace 1."""

    entries: np.ndarray
    normalization: int


@dataclass(frozen=True)
class ReducedDensityMatrix:
    """Ensemble-averaged kernel rho(r, r'); unit trace under dx weighting."""

    kernel: np.ndarray
    trace_weight: float


def _as_wave_matrix(waves, dx: float | None = None) -> tuple[np.ndarray, float]:
    """Coerce a wave ensemble to (values (M, n), dx)."""
    if isinstance(waves, np.ndarray):
        if dx is None:
            raise DimensionError("raw wave arrays need an explicit dx")
        mat = np.atleast_2d(np.asarray(waves, dtype=complex))
        return mat, float(dx)
    fields = list(waves)
    if not fields:
        raise EmptyDomainError("empty wave ensemble")
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise DimensionError("wave ensemble members live on different grids")
    if dx is not None and not np.isclose(dx, grid.dx):
        raise DimensionError("explicit dx contradicts the fields' grid spacing")
    return np.stack([f.values for f in fields]), grid.dx


def walker_statistics(positions) -> ClassicalStats:
    """Population moments of a point cloud of shape (M,) or (M, d)."""
    pts = np.asarray(positions, dtype=float)
    if pts.size == 0:
        raise EmptyDomainError("walker statistics of an empty point set")
    if pts.ndim == 1:
        pts = pts[:, None]
    mean = pts.mean(axis=0)
    centered = pts - mean
    cov = centered.T @ centered / pts.shape[0]
    var = float(np.trace(cov))
    return ClassicalStats(mean=mean, covariance=cov, variance=var,
                          std=math.sqrt(max(var, 0.0)), count=pts.shape[0])


def variance_decomposition(partitioned) -> tuple[float, float, float]:
    """Law of total variance over a population-weighted partition.

    ``partitioned`` is a sequence of point arrays, one per domain, jointly
    covering the full point set. Returns (global_var, mean_of_local_vars,
    var_of_local_means); the first equals the sum of the other two.
    """
    groups = [np.atleast_2d(np.asarray(g, dtype=float)) for g in partitioned if len(g) > 0]
    if not groups:
        raise PartitionError("no points assigned to any domain")
    d = groups[0].shape[1]
    for g in groups:
        if g.shape[1] != d:
            raise PartitionError("domains carry points of different dimensionality")
    total = np.concatenate(groups, axis=0)
    m = total.shape[0]
    global_stats = walker_statistics(total)
    mean_local_var = 0.0
    var_local_means = 0.0
    for g in groups:
        local = walker_statistics(g)
        w = g.shape[0] / m
        mean_local_var += w * local.variance
        var_local_means += w * float(np.sum((local.mean - global_stats.mean) ** 2))
    return global_stats.variance, mean_local_var, var_local_means


def gram_matrix(waves, dx: float | None = None) -> GramMatrix:
    """Gram matrix of the ensemble, G_kl = <phi_k, phi_l> / M_sel."""
    mat, dx = _as_wave_matrix(waves, dx)
    m = mat.shape[0]
    if m < 1:
        raise EmptyDomainError("empty wave ensemble")
    w = quad_weights(mat.shape[1], dx)
    g = ((mat * w) @ mat.conj().T) / m
    g = 0.5 * (g + g.conj().T)  # exact Hermiticity against roundoff
    return GramMatrix(entries=g, normalization=m)


def hilbert_variance(g: GramMatrix) -> float:
    """Ensemble spread 1 - (1/M_sel) * sum_kl G_kl = 1 - ||mean wave||^2."""
    total = np.sum(g.entries).real
    return float(1.0 - total / g.normalization)


def functional_std(g: GramMatrix) -> float:
    """Square root of the Hilbert-space variance."""
    return math.sqrt(max(hilbert_variance(g), 0.0))


def reduced_density_matrix(waves, dx: float | None = None) -> ReducedDensityMatrix:
    """Ensemble-averaged kernel rho(r, r') = (1/M) sum_k phi_k*(r) phi_k(r')."""
    mat, dx = _as_wave_matrix(waves, dx)
    m = mat.shape[0]
    if m < 1:
        raise EmptyDomainError("empty wave ensemble")
    kernel = (mat.conj().T @ mat) / m
    kernel = 0.5 * (kernel + kernel.conj().T)
    return ReducedDensityMatrix(kernel=kernel, trace_weight=dx)


def spectrum_from_gram(g: GramMatrix) -> SchmidtSpectrum:
    """Descending eigenvalues of the Gram matrix, clamped at zero."""
    vals = hermitian_eigendecompose(g.entries).eigenvalues
    return _clamped_spectrum(vals)


def spectrum_from_rdm(rho: ReducedDensityMatrix) -> SchmidtSpectrum:
    """Descending eigenvalues of the quadrature-weighted density kernel."""
    r = np.sqrt(quad_weights(rho.kernel.shape[0], rho.trace_weight))
    weighted = r[:, None] * rho.kernel * r[None, :]
    vals = hermitian_eigendecompose(weighted).eigenvalues
    return _clamped_spectrum(vals)


def _clamped_spectrum(vals: np.ndarray) -> SchmidtSpectrum:
    if vals.min(initial=0.0) < -CLAMP_TOL:
        raise PreconditionError(
            f"spectrum has eigenvalue {vals.min():.3e} below the roundoff clamp; "
            "input matrix is not positive semidefinite"
        )
    return SchmidtSpectrum(lambdas=np.clip(vals, 0.0, None))


def ensemble_spectrum(waves, dx: float | None = None) -> SchmidtSpectrum:
    """Schmidt spectrum of a wave ensemble via the cheaper of GM and RDM.

    Both routes share the same nonzero eigenvalues; the M x M Gram matrix is
    used when the ensemble is smaller than the grid, the n x n density
    kernel otherwise.
    """
    mat, dx = _as_wave_matrix(waves, dx)
    if mat.shape[0] <= mat.shape[1]:
        return spectrum_from_gram(gram_matrix(mat, dx))
    return spectrum_from_rdm(reduced_density_matrix(mat, dx))


def von_neumann_entropy(spec: SchmidtSpectrum) -> float:
    """S = -sum(lambda ln lambda) in nats, ignoring weights below 1e-14."""
    lam = spec.lambdas
    lam = lam[lam > LOG_FLOOR]
    return float(-np.sum(lam * np.log(lam)))


def linear_entropy(spec_or_gram) -> float:
    """S_L = 1 - sum(lambda^2) = 1 - sum_kl |G_kl|^2."""
    if isinstance(spec_or_gram, GramMatrix):
        return float(1.0 - np.sum(np.abs(spec_or_gram.entries) ** 2))
    return float(1.0 - np.sum(spec_or_gram.lambdas**2))


def effective_schmidt_number(spec: SchmidtSpectrum) -> float:
    """Inverse participation ratio K_eff = 1 / sum(lambda^2)."""
    return float(1.0 / np.sum(spec.lambdas**2))


def cross_gram_matrix(waves_i, waves_j, dx: float | None = None) -> np.ndarray:
    """Cross-ensemble overlaps <phi_i^k, phi_j^l> / M; not Hermitian in general."""
    mat_i, dx_i = _as_wave_matrix(waves_i, dx)
    mat_j, dx_j = _as_wave_matrix(waves_j, dx)
    if mat_i.shape != mat_j.shape or not np.isclose(dx_i, dx_j):
        raise DimensionError("cross Gram matrix needs equal-sized ensembles on one grid")
    m = mat_i.shape[0]
    w = quad_weights(mat_i.shape[1], dx_i)
    return ((mat_i * w) @ mat_j.conj().T) / m


def slater_pair_entropy(phi1: ComplexField1D, phi2: ComplexField1D,
                        ortho_tol: float = 1e-6) -> float:
    """One-body entropy of the two-particle Slater state built from a pair.

    Constructs (phi1 x phi2 - phi2 x phi1)/sqrt(2) on the product grid,
    partial-traces it and returns the entropy of the resulting one-body
    state: exactly ln 2 for an orthonormal pair. This is the exchange
    baseline subtracted from identical-fermion entropies.
    """
    if phi1.grid != phi2.grid:
        raise DimensionError("slater pair must share a grid")
    dx = phi1.grid.dx
    weights = phi1.grid.weights
    n1 = phi1.norm_sq()
    n2 = phi2.norm_sq()
    overlap = np.sum(phi1.values * np.conj(phi2.values) * weights)
    if abs(n1 - 1.0) > ortho_tol or abs(n2 - 1.0) > ortho_tol:
        raise PreconditionError("slater pair members must be normalized")
    if abs(overlap) > ortho_tol:
        raise PreconditionError(
            f"slater pair must be orthogonal; got |<phi1, phi2>| = {abs(overlap):.2e}"
        )
    psi = np.sqrt(0.5) * (np.outer(phi1.values, phi2.values) - np.outer(phi2.values, phi1.values))
    # partial trace over the second coordinate: rho(x, x') = int psi(x,y) psi*(x',y) dy
    rho = (psi * weights) @ psi.conj().T
    spec = spectrum_from_rdm(ReducedDensityMatrix(kernel=rho, trace_weight=dx))
    return von_neumann_entropy(spec)


def slater_mixture_spectrum(waves1: np.ndarray, waves2: np.ndarray, dx: float) -> SchmidtSpectrum:
    """Spectrum of the averaged one-body state of per-walker Slater pairs.

    Each pair (phi1_k, phi2_k) contributes the one-body state of its Slater
    determinant, (|phi1><phi1| + |phi2><phi2|)/2; the mixture over walkers
    equals the unit-trace ensemble over all 2M waves with weight 1/(2M).
    Its entropy is at least ln 2, so subtracting the exchange baseline can
    never go negative.
    """
    stacked = np.concatenate([np.atleast_2d(waves1), np.atleast_2d(waves2)], axis=0)
    return ensemble_spectrum(stacked, dx)

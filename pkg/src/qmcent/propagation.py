"""Spectral kinetic-energy machinery on pinned-boundary grids.

Wavefunctions vanish at the box edges, so the interior points are expanded
in sine modes via the type-I DST (orthonormal, self-inverse). That makes
exp(-dtau * T) exact per mode and the Strang split

    exp(-dtau V/2) . exp(-dtau T) . exp(-dtau V/2)

unconditionally stable in imaginary time.
"""

from __future__ import annotations

import numpy as np
import scipy.fft

from .numerics import Grid1D


def sine_wavenumbers(grid: Grid1D) -> np.ndarray:
    """Wavenumbers k_j = j*pi/L of the interior sine modes, j = 1..n-2."""
    length = grid.x_max - grid.x_min
    j = np.arange(1, grid.n - 1)
    return j * np.pi / length


def kinetic_factor(grid: Grid1D, dtau: float) -> np.ndarray:
    """Per-mode decay exp(-dtau * k^2 / 2) for a full kinetic step."""
    k = sine_wavenumbers(grid)
    return np.exp(-0.5 * dtau * k * k)


def apply_kinetic_exponential(values: np.ndarray, factor: np.ndarray) -> np.ndarray:
    """Apply exp(-dtau*T) along the last axis; endpoints stay pinned at 0."""
    out = np.zeros_like(values)
    interior = scipy.fft.dst(values[..., 1:-1], type=1, norm="ortho", axis=-1)
    interior *= factor
    out[..., 1:-1] = scipy.fft.dst(interior, type=1, norm="ortho", axis=-1)
    return out


def apply_kinetic_exponential_2d(values: np.ndarray, fx: np.ndarray, fy: np.ndarray) -> np.ndarray:
    """Apply exp(-dtau*(Tx+Ty)) to a 2D field with pinned edges."""
    out = np.zeros_like(values)
    interior = scipy.fft.dstn(values[1:-1, 1:-1], type=1, norm="ortho")
    interior *= fx[:, None]
    interior *= fy[None, :]
    out[1:-1, 1:-1] = scipy.fft.dstn(interior, type=1, norm="ortho")
    return out


def apply_kinetic_operator(values: np.ndarray, grid: Grid1D) -> np.ndarray:
    """Apply T = -0.5 d^2/dx^2 spectrally along the last axis."""
    k = sine_wavenumbers(grid)
    out = np.zeros_like(values)
    interior = scipy.fft.dst(values[..., 1:-1], type=1, norm="ortho", axis=-1)
    interior *= 0.5 * k * k
    out[..., 1:-1] = scipy.fft.dst(interior, type=1, norm="ortho", axis=-1)
    return out


def apply_kinetic_operator_2d(values: np.ndarray, gx: Grid1D, gy: Grid1D) -> np.ndarray:
    """Apply Tx + Ty spectrally to a 2D field."""
    kx = sine_wavenumbers(gx)
    ky = sine_wavenumbers(gy)
    out = np.zeros_like(values)
    interior = scipy.fft.dstn(values[1:-1, 1:-1], type=1, norm="ortho")
    interior = interior * (0.5 * kx * kx)[:, None] + interior * (0.5 * ky * ky)[None, :]
    out[1:-1, 1:-1] = scipy.fft.dstn(interior, type=1, norm="ortho")
    return out


def kinetic_matrix(grid: Grid1D) -> np.ndarray:
    """Dense matrix of the spectral kinetic operator on the full grid.

    Columns outside the interior are zero (pinned edges). Mainly for dense
    oracle Hamiltonians in tests; O(n^2) storage.
    """
    n = grid.n
    t = np.zeros((n, n))
    basis = np.eye(n - 2)
    modes = scipy.fft.dst(basis, type=1, norm="ortho", axis=-1)
    k = sine_wavenumbers(grid)
    back = scipy.fft.dst(modes * (0.5 * k * k), type=1, norm="ortho", axis=-1)
    t[1:-1, 1:-1] = back.T
    return t

"""Shared helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from qmcent.numerics import Grid1D


def random_wave_matrix(rng, grid: Grid1D, count: int, complex_valued: bool = True):
    """Normalized random waves pinned to zero at the box edges, shape (M, n)."""
    shape = (count, grid.n)
    mats = rng.normal(size=shape)
    if complex_valued:
        mats = mats + 1j * rng.normal(size=shape)
    mats = np.asarray(mats, dtype=complex)
    mats[:, 0] = mats[:, -1] = 0.0
    norms = np.sqrt(np.sum(np.abs(mats) ** 2 * grid.weights, axis=1))
    return mats / norms[:, None]


def orthonormal_wave_matrix(rng, grid: Grid1D, count: int):
    """Waves orthonormal under the grid quadrature, shape (M, n)."""
    raw = rng.normal(size=(grid.n - 2, count)) + 1j * rng.normal(size=(grid.n - 2, count))
    q = np.linalg.qr(raw)[0]  # orthonormal columns under the plain dot product
    waves = np.zeros((count, grid.n), dtype=complex)
    waves[:, 1:-1] = q.T / np.sqrt(grid.weights[1:-1])
    return waves


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)


@pytest.fixture
def grid():
    return Grid1D(-6.0, 6.0, 64)

"""Grids, quadrature, eigendecomposition and Schmidt spectra."""

import math

import numpy as np
import pytest

from qmcent.errors import (
    DegenerateInputError,
    DimensionError,
    ParameterError,
    PreconditionError,
)
from qmcent.numerics import (
    ComplexField1D,
    ComplexField2D,
    Grid1D,
    Grid2D,
    hermitian_eigendecompose,
    inner_product,
    normalize,
    quad_weights,
    schmidt_decompose,
)
from qmcent.stats import von_neumann_entropy

from conftest import orthonormal_wave_matrix, random_wave_matrix


def jacobi_eigenvalues(a: np.ndarray, sweeps: int = 100, tol: float = 1e-14) -> np.ndarray:
    """Independent dense eigensolver: cyclic Jacobi on the real embedding.

    A complex Hermitian matrix H = X + iY maps to the real symmetric
    [[X, -Y], [Y, X]], whose spectrum is that of H with every eigenvalue
    doubled.
    """
    x, y = a.real, a.imag
    m = np.block([[x, -y], [y, x]])
    n = m.shape[0]
    for _ in range(sweeps):
        off = np.sqrt(np.sum(np.square(m)) - np.sum(np.square(np.diag(m))))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(m[p, q]) < 1e-18:
                    continue
                theta = 0.5 * math.atan2(2 * m[p, q], m[q, q] - m[p, p])
                c, s = math.cos(theta), math.sin(theta)
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                m = rot.T @ m @ rot
    vals = np.sort(np.diag(m))[::-1]
    return vals[::2]  # doubled spectrum: keep one copy


class TestGrid:
    def test_spacing_and_points(self):
        g = Grid1D(-1.0, 1.0, 11)
        assert g.dx == pytest.approx(0.2)
        assert np.allclose(g.points, np.linspace(-1, 1, 11))

    def test_too_few_points_rejected(self):
        with pytest.raises(ParameterError):
            Grid1D(0.0, 1.0, 4)

    def test_empty_range_rejected(self):
        with pytest.raises(ParameterError):
            Grid1D(1.0, 1.0, 16)

    def test_weights_sum_to_length(self):
        g = Grid1D(-3.0, 5.0, 33)
        assert np.sum(g.weights) == pytest.approx(8.0, abs=1e-12)


class TestInnerProduct:
    def test_normalized_self_overlap(self, rng, grid):
        f = ComplexField1D(grid=grid, values=random_wave_matrix(rng, grid, 1)[0])
        assert inner_product(f, f) == pytest.approx(1.0, abs=1e-12)

    def test_hermitian_symmetry(self, rng, grid):
        waves = random_wave_matrix(rng, grid, 2)
        f = ComplexField1D(grid=grid, values=waves[0])
        g = ComplexField1D(grid=grid, values=waves[1])
        assert inner_product(f, g) == pytest.approx(np.conj(inner_product(g, f)), abs=1e-12)

    def test_constant_field_on_unit_interval(self):
        # analytic integral of 1 over [0, 1]
        g = Grid1D(0.0, 1.0, 101)
        one = ComplexField1D(grid=g, values=np.ones(101))
        assert inner_product(one, one) == pytest.approx(1.0, abs=1e-12)

    def test_grid_mismatch_rejected(self, grid):
        other = Grid1D(-6.0, 6.0, 65)
        f = ComplexField1D(grid=grid, values=np.ones(grid.n))
        g = ComplexField1D(grid=other, values=np.ones(other.n))
        with pytest.raises(DimensionError):
            inner_product(f, g)

    def test_positive_definite(self, rng, grid):
        for _ in range(10):
            f = ComplexField1D(grid=grid, values=random_wave_matrix(rng, grid, 1)[0])
            assert inner_product(f, f).real > 0.0
        zero = ComplexField1D(grid=grid, values=np.zeros(grid.n))
        assert inner_product(zero, zero) == 0.0


class TestNormalize:
    def test_idempotent(self, rng, grid):
        f = ComplexField1D(grid=grid, values=random_wave_matrix(rng, grid, 1)[0])
        again = normalize(f)
        assert np.allclose(again.values, f.values, atol=1e-12)

    def test_scale_invariant(self, rng, grid):
        raw = random_wave_matrix(rng, grid, 1)[0] * (2.37 - 0.4j)
        f = ComplexField1D(grid=grid, values=raw)
        g = ComplexField1D(grid=grid, values=2.0 * raw)
        assert np.allclose(normalize(f).values, normalize(g).values, atol=1e-12)

    def test_gaussian_unit_norm(self):
        g = Grid1D(-10.0, 10.0, 256)
        f = normalize(ComplexField1D(grid=g, values=np.exp(-g.points**2 / 2)))
        # independent quadrature route
        check = np.trapezoid(np.abs(f.values) ** 2, dx=g.dx)
        assert check == pytest.approx(1.0, abs=1e-12)

    def test_zero_field_rejected(self, grid):
        with pytest.raises(DegenerateInputError):
            normalize(ComplexField1D(grid=grid, values=np.zeros(grid.n)))


class TestHermitianEigendecompose:
    def test_identity(self):
        spec = hermitian_eigendecompose(np.eye(3))
        assert np.allclose(spec.eigenvalues, [1.0, 1.0, 1.0])

    def test_diagonal_descending(self):
        spec = hermitian_eigendecompose(np.diag([0.3, 0.7]))
        assert np.allclose(spec.eigenvalues, [0.7, 0.3])

    def test_matches_jacobi_oracle(self, rng):
        a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        a = a + a.conj().T
        spec = hermitian_eigendecompose(a)
        oracle = jacobi_eigenvalues(a)
        assert np.allclose(spec.eigenvalues, oracle, atol=1e-8)

    def test_reconstruction_and_orthonormality(self, rng):
        a = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
        a = 0.5 * (a + a.conj().T)
        spec = hermitian_eigendecompose(a)
        v = spec.eigenvectors
        assert np.allclose(v.conj().T @ v, np.eye(12), atol=1e-10)
        rebuilt = v @ np.diag(spec.eigenvalues) @ v.conj().T
        norm = np.linalg.norm(a)
        assert np.linalg.norm(a - rebuilt) <= 1e-8 * norm
        # residual per eigenpair
        for i in range(12):
            res = a @ v[:, i] - spec.eigenvalues[i] * v[:, i]
            assert np.linalg.norm(res) <= 1e-8 * norm

    def test_trace_identity(self, rng):
        a = rng.normal(size=(9, 9))
        a = 0.5 * (a + a.T)
        spec = hermitian_eigendecompose(a)
        assert np.sum(spec.eigenvalues) == pytest.approx(np.trace(a), abs=1e-10)

    def test_non_square_rejected(self):
        with pytest.raises(DimensionError):
            hermitian_eigendecompose(np.ones((3, 4)))


def _ortho_pair(rng, grid):
    waves = orthonormal_wave_matrix(rng, grid, 2)
    return waves[0], waves[1]


class TestSchmidtDecompose:
    def test_product_state_rank_one(self, rng, grid):
        u, v = _ortho_pair(rng, grid)
        psi = ComplexField2D(grid=Grid2D.square(grid), values=np.outer(u, v))
        lam = schmidt_decompose(psi).lambdas
        assert lam[0] == pytest.approx(1.0, abs=1e-10)
        assert np.all(lam[1:] < 1e-10)

    def test_antisymmetric_pair(self, rng, grid):
        u, v = _ortho_pair(rng, grid)
        slater = (np.outer(u, v) - np.outer(v, u)) / math.sqrt(2)
        lam = schmidt_decompose(ComplexField2D(grid=Grid2D.square(grid), values=slater)).lambdas
        assert np.allclose(lam[:2], [0.5, 0.5], atol=1e-10)
        assert np.all(lam[2:] < 1e-10)

    def test_two_mode_superposition(self, rng, grid):
        # cos(t) u x u + sin(t) v x v has weights (cos^2 t, sin^2 t)
        u, v = _ortho_pair(rng, grid)
        theta = 0.3
        values = math.cos(theta) * np.outer(u, u) + math.sin(theta) * np.outer(v, v)
        lam = schmidt_decompose(ComplexField2D(grid=Grid2D.square(grid), values=values)).lambdas
        assert lam[0] == pytest.approx(math.cos(0.3) ** 2, abs=1e-10)
        assert lam[0] == pytest.approx(0.91267, abs=5e-6)
        assert lam[1] == pytest.approx(math.sin(0.3) ** 2, abs=1e-10)

    def test_weights_sum_to_one(self, rng, grid):
        u, v = _ortho_pair(rng, grid)
        psi = ComplexField2D(
            grid=Grid2D.square(grid),
            values=0.6 * np.outer(u, v) + 0.8 * np.outer(v, u),
        )
        lam = schmidt_decompose(psi).lambdas
        assert np.sum(lam) == pytest.approx(1.0, abs=1e-12)

    def test_unnormalized_rejected(self, grid):
        psi = ComplexField2D(grid=Grid2D.square(grid), values=np.ones((grid.n, grid.n)))
        with pytest.raises(PreconditionError):
            schmidt_decompose(psi)

    def test_entropy_invariant_under_interior_relabeling(self, rng, grid):
        # consistent permutation of interior grid indices on both axes
        u, v = _ortho_pair(rng, grid)
        values = 0.6 * np.outer(u, v) + 0.8 * np.outer(v, u)
        psi = ComplexField2D(grid=Grid2D.square(grid), values=values)
        s_original = von_neumann_entropy(schmidt_decompose(psi))
        perm = np.concatenate([[0], rng.permutation(np.arange(1, grid.n - 1)), [grid.n - 1]])
        shuffled = ComplexField2D(grid=Grid2D.square(grid), values=values[np.ix_(perm, perm)])
        s_shuffled = von_neumann_entropy(schmidt_decompose(shuffled))
        assert s_shuffled == pytest.approx(s_original, abs=1e-10)


def test_quad_weights_match_trapezoid():
    w = quad_weights(5, 0.5)
    assert np.allclose(w, [0.25, 0.5, 0.5, 0.5, 0.25])

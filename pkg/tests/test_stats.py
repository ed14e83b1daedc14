"""Ensemble statistics: moments, Gram/RDM spectra, entropies."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmcent import stats
from qmcent.errors import (
    DimensionError,
    EmptyDomainError,
    PartitionError,
    PreconditionError,
)
from qmcent.numerics import ComplexField1D, Grid1D, SchmidtSpectrum, quad_weights

from conftest import orthonormal_wave_matrix, random_wave_matrix


class TestWalkerStatistics:
    def test_two_points(self):
        s = stats.walker_statistics(np.array([-1.0, 1.0]))
        assert s.mean[0] == 0.0
        assert s.variance == pytest.approx(1.0)
        assert s.std == pytest.approx(1.0)

    def test_single_point(self):
        s = stats.walker_statistics(np.array([[3.0, -2.0]]))
        assert s.variance == 0.0

    def test_trace_matches_direct_sum(self, rng):
        pts = rng.normal(size=(100, 2))
        s = stats.walker_statistics(pts)
        direct = np.sum(np.sum((pts - pts.mean(axis=0)) ** 2, axis=1)) / 100
        assert s.variance == pytest.approx(direct, abs=1e-12)
        assert np.allclose(s.covariance, s.covariance.T)

    def test_empty_rejected(self):
        with pytest.raises(EmptyDomainError):
            stats.walker_statistics(np.empty((0, 2)))


class TestVarianceDecomposition:
    def test_single_domain(self, rng):
        pts = rng.normal(size=(40, 2))
        total, local, between = stats.variance_decomposition([pts])
        assert between == pytest.approx(0.0, abs=1e-14)
        assert total == pytest.approx(local, abs=1e-12)

    def test_singleton_domains(self, rng):
        pts = rng.normal(size=(10, 1))
        total, local, between = stats.variance_decomposition([p[None, :] for p in pts])
        assert local == pytest.approx(0.0, abs=1e-14)
        assert total == pytest.approx(between, abs=1e-12)

    def test_identity_three_domains(self, rng):
        pts = rng.normal(size=(50, 3))
        groups = [pts[:17], pts[17:30], pts[30:]]
        total, local, between = stats.variance_decomposition(groups)
        assert total == pytest.approx(local + between, abs=1e-12)

    def test_no_points_rejected(self):
        with pytest.raises(PartitionError):
            stats.variance_decomposition([])

    def test_mixed_dimensions_rejected(self, rng):
        with pytest.raises(PartitionError):
            stats.variance_decomposition([rng.normal(size=(3, 2)), rng.normal(size=(3, 3))])


class TestGramMatrix:
    def test_identical_waves_rank_one(self, rng, grid):
        wave = random_wave_matrix(rng, grid, 1)[0]
        g = stats.gram_matrix(np.tile(wave, (5, 1)), grid.dx)
        assert np.allclose(g.entries, 0.2, atol=1e-12)
        lam = stats.spectrum_from_gram(g).lambdas
        assert lam[0] == pytest.approx(1.0, abs=1e-10)

    def test_orthonormal_waves_diagonal(self, rng, grid):
        waves = orthonormal_wave_matrix(rng, grid, 2)
        g = stats.gram_matrix(waves, grid.dx)
        assert np.allclose(g.entries, np.diag([0.5, 0.5]), atol=1e-12)

    def test_unit_trace_and_psd(self, rng, grid):
        waves = random_wave_matrix(rng, grid, 7)
        g = stats.gram_matrix(waves, grid.dx)
        assert np.trace(g.entries).real == pytest.approx(1.0, abs=1e-10)
        assert np.allclose(g.entries, g.entries.conj().T)
        assert stats.spectrum_from_gram(g).lambdas.min() >= 0.0

    def test_matches_rdm_spectrum(self, rng):
        grid = Grid1D(-4.0, 4.0, 64)
        waves = random_wave_matrix(rng, grid, 4)
        lam_gram = stats.spectrum_from_gram(stats.gram_matrix(waves, grid.dx)).lambdas
        lam_rdm = stats.spectrum_from_rdm(stats.reduced_density_matrix(waves, grid.dx)).lambdas
        for a, b in zip(lam_gram, lam_rdm[:4]):
            assert abs(a - b) <= 1e-10 * max(a, 1e-6)

    def test_field_list_input(self, rng, grid):
        waves = random_wave_matrix(rng, grid, 3)
        fields = [ComplexField1D(grid=grid, values=w) for w in waves]
        g1 = stats.gram_matrix(fields)
        g2 = stats.gram_matrix(waves, grid.dx)
        assert np.allclose(g1.entries, g2.entries)

    def test_empty_rejected(self, grid):
        with pytest.raises(EmptyDomainError):
            stats.gram_matrix([])


class TestHilbertVariance:
    def test_identical_vanishes(self, rng, grid):
        wave = random_wave_matrix(rng, grid, 1)[0]
        g = stats.gram_matrix(np.tile(wave, (6, 1)), grid.dx)
        assert abs(stats.hilbert_variance(g)) < 1e-12
        assert stats.functional_std(g) == 0.0

    def test_orthonormal_value(self, rng, grid):
        waves = orthonormal_wave_matrix(rng, grid, 4)
        g = stats.gram_matrix(waves, grid.dx)
        assert stats.hilbert_variance(g) == pytest.approx(0.75, abs=1e-10)

    def test_matches_mean_wave_route(self, rng, grid):
        waves = random_wave_matrix(rng, grid, 9)
        g = stats.gram_matrix(waves, grid.dx)
        mean_wave = waves.mean(axis=0)
        direct = 1.0 - np.sum(np.abs(mean_wave) ** 2 * grid.weights)
        assert stats.hilbert_variance(g) == pytest.approx(direct, abs=1e-12)


class TestReducedDensityMatrix:
    def test_single_wave_projector(self, rng, grid):
        waves = random_wave_matrix(rng, grid, 1)
        rho = stats.reduced_density_matrix(waves, grid.dx)
        spec = stats.spectrum_from_rdm(rho)
        assert stats.linear_entropy(spec) == pytest.approx(0.0, abs=1e-10)

    def test_two_orthonormal_purity_half(self, rng, grid):
        waves = orthonormal_wave_matrix(rng, grid, 2)
        spec = stats.spectrum_from_rdm(stats.reduced_density_matrix(waves, grid.dx))
        assert np.sum(spec.lambdas**2) == pytest.approx(0.5, abs=1e-10)

    def test_unit_trace(self, rng, grid):
        waves = random_wave_matrix(rng, grid, 6)
        rho = stats.reduced_density_matrix(waves, grid.dx)
        trace = np.sum(np.diag(rho.kernel).real * grid.weights)
        assert trace == pytest.approx(1.0, abs=1e-10)

    def test_spectrum_equals_gram_spectrum(self, rng, grid):
        waves = random_wave_matrix(rng, grid, 6)
        lam_rdm = stats.spectrum_from_rdm(stats.reduced_density_matrix(waves, grid.dx)).lambdas
        lam_gram = stats.spectrum_from_gram(stats.gram_matrix(waves, grid.dx)).lambdas
        assert np.allclose(lam_rdm[:6], lam_gram, atol=1e-10)


class TestSpectrumFromGram:
    def test_rank_one(self):
        g = stats.GramMatrix(entries=np.full((3, 3), 1 / 3), normalization=3)
        lam = stats.spectrum_from_gram(g).lambdas
        assert np.allclose(lam, [1.0, 0.0, 0.0], atol=1e-12)

    def test_diagonal(self):
        g = stats.GramMatrix(entries=np.diag([0.5, 0.5]), normalization=2)
        assert np.allclose(stats.spectrum_from_gram(g).lambdas, [0.5, 0.5])

    def test_frobenius_identity(self, rng, grid):
        waves = random_wave_matrix(rng, grid, 8)
        g = stats.gram_matrix(waves, grid.dx)
        lam = stats.spectrum_from_gram(g).lambdas
        assert np.sum(lam**2) == pytest.approx(np.sum(np.abs(g.entries) ** 2), abs=1e-10)


class TestEntropies:
    def test_pure(self):
        assert stats.von_neumann_entropy(SchmidtSpectrum(lambdas=np.array([1.0]))) == 0.0

    def test_equal_pair(self):
        spec = SchmidtSpectrum(lambdas=np.array([0.5, 0.5]))
        assert stats.von_neumann_entropy(spec) == pytest.approx(math.log(2), abs=1e-12)

    def test_overlapping_pair_analytic(self, rng, grid):
        # ensemble {u, (u+v)/sqrt(2)} has Gram eigenvalues (2 +- sqrt(2))/4
        u, v = orthonormal_wave_matrix(rng, grid, 2)
        w = (u + v) / math.sqrt(2)
        g = stats.gram_matrix(np.stack([u, w]), grid.dx)
        lam = stats.spectrum_from_gram(g).lambdas
        expected = np.array([(2 + math.sqrt(2)) / 4, (2 - math.sqrt(2)) / 4])
        assert np.allclose(lam, expected, atol=1e-10)
        s = stats.von_neumann_entropy(stats.spectrum_from_gram(g))
        analytic = -np.sum(expected * np.log(expected))
        assert s == pytest.approx(analytic, abs=1e-10)
        assert s == pytest.approx(0.4165, abs=5e-5)

    def test_linear_entropy_routes_agree(self, rng, grid):
        waves = random_wave_matrix(rng, grid, 5)
        g = stats.gram_matrix(waves, grid.dx)
        spec = stats.spectrum_from_gram(g)
        assert stats.linear_entropy(g) == pytest.approx(stats.linear_entropy(spec), abs=1e-10)

    def test_linear_entropy_purity_quadrature(self, rng, grid):
        waves = random_wave_matrix(rng, grid, 5)
        rho = stats.reduced_density_matrix(waves, grid.dx)
        w = quad_weights(grid.n, grid.dx)
        # Tr rho^2 = sum_rr' rho(r,r') rho(r',r) w_r w_r'
        purity = np.real(np.sum((rho.kernel * w[None, :]) * (rho.kernel.T * w[:, None])))
        spec = stats.spectrum_from_gram(stats.gram_matrix(waves, grid.dx))
        assert stats.linear_entropy(spec) == pytest.approx(1.0 - purity, abs=1e-8)

    def test_orthonormal_linear_entropy(self, rng, grid):
        waves = orthonormal_wave_matrix(rng, grid, 4)
        g = stats.gram_matrix(waves, grid.dx)
        assert stats.linear_entropy(g) == pytest.approx(0.75, abs=1e-10)


class TestEffectiveSchmidtNumber:
    def test_pure(self):
        assert stats.effective_schmidt_number(SchmidtSpectrum(lambdas=np.array([1.0]))) == 1.0

    def test_uniform(self):
        spec = SchmidtSpectrum(lambdas=np.full(6, 1 / 6))
        assert stats.effective_schmidt_number(spec) == pytest.approx(6.0, abs=1e-12)

    def test_two_level(self):
        spec = SchmidtSpectrum(lambdas=np.array([0.7, 0.3]))
        assert stats.effective_schmidt_number(spec) == pytest.approx(1.0 / 0.58, abs=1e-12)
        assert stats.effective_schmidt_number(spec) == pytest.approx(1.7241, abs=5e-5)


class TestCrossGram:
    def test_same_ensemble_reduces_to_gram(self, rng, grid):
        waves = random_wave_matrix(rng, grid, 4)
        cross = stats.cross_gram_matrix(waves, waves, grid.dx)
        g = stats.gram_matrix(waves, grid.dx)
        assert np.allclose(cross, g.entries, atol=1e-12)

    def test_entries_match_quadrature(self, rng, grid):
        a = random_wave_matrix(rng, grid, 3)
        b = random_wave_matrix(rng, grid, 3)
        cross = stats.cross_gram_matrix(a, b, grid.dx)
        w = quad_weights(grid.n, grid.dx)
        for k in range(3):
            for l in range(3):
                direct = np.sum(a[k] * np.conj(b[l]) * w) / 3
                assert cross[k, l] == pytest.approx(direct, abs=1e-12)

    def test_size_mismatch_rejected(self, rng, grid):
        a = random_wave_matrix(rng, grid, 3)
        b = random_wave_matrix(rng, grid, 4)
        with pytest.raises(DimensionError):
            stats.cross_gram_matrix(a, b, grid.dx)


class TestSlaterPairEntropy:
    def test_orthonormal_pairs_give_ln2(self, rng, grid):
        for _ in range(5):
            u, v = orthonormal_wave_matrix(rng, grid, 2)
            s = stats.slater_pair_entropy(
                ComplexField1D(grid=grid, values=u),
                ComplexField1D(grid=grid, values=v),
            )
            assert s == pytest.approx(math.log(2), abs=1e-10)

    def test_corrected_value_is_zero(self, rng, grid):
        u, v = orthonormal_wave_matrix(rng, grid, 2)
        s = stats.slater_pair_entropy(
            ComplexField1D(grid=grid, values=u),
            ComplexField1D(grid=grid, values=v),
        )
        assert s - stats.LN2 == pytest.approx(0.0, abs=1e-10)

    def test_matches_2d_schmidt_route(self, rng, grid):
        from qmcent.numerics import ComplexField2D, Grid2D, schmidt_decompose

        u, v = orthonormal_wave_matrix(rng, grid, 2)
        slater = (np.outer(u, v) - np.outer(v, u)) / math.sqrt(2)
        lam = schmidt_decompose(ComplexField2D(grid=Grid2D.square(grid), values=slater)).lambdas
        assert np.allclose(lam[:2], [0.5, 0.5], atol=1e-10)

    def test_non_orthogonal_rejected(self, rng, grid):
        u, v = orthonormal_wave_matrix(rng, grid, 2)
        w = (u + v) / math.sqrt(2)
        with pytest.raises(PreconditionError):
            stats.slater_pair_entropy(
                ComplexField1D(grid=grid, values=u),
                ComplexField1D(grid=grid, values=w),
            )


class TestSlaterMixture:
    def test_entropy_bounded_below_by_ln2(self, rng, grid):
        m = 6
        w1 = random_wave_matrix(rng, grid, m)
        w2 = np.empty_like(w1)
        weights = grid.weights
        for k in range(m):
            raw = random_wave_matrix(rng, grid, 1)[0]
            raw = raw - np.sum(raw * np.conj(w1[k]) * weights) * w1[k]
            w2[k] = raw / math.sqrt(np.sum(np.abs(raw) ** 2 * weights))
        spec = stats.slater_mixture_spectrum(w1, w2, grid.dx)
        assert stats.von_neumann_entropy(spec) >= stats.LN2 - 1e-12


@st.composite
def wave_ensembles(draw):
    m = draw(st.integers(min_value=2, max_value=12))
    n = draw(st.sampled_from([16, 24, 40]))
    seed = draw(st.integers(min_value=0, max_value=2**31 - 1))
    grid = Grid1D(-5.0, 5.0, n)
    rng = np.random.default_rng(seed)
    return grid, random_wave_matrix(rng, grid, m)


class TestEnsembleProperties:
    @given(wave_ensembles())
    @settings(max_examples=40, deadline=None)
    def test_spectral_equivalence(self, ensemble):
        grid, waves = ensemble
        lam_g = stats.spectrum_from_gram(stats.gram_matrix(waves, grid.dx)).lambdas
        lam_r = stats.spectrum_from_rdm(stats.reduced_density_matrix(waves, grid.dx)).lambdas
        keep = lam_g > 1e-6
        assert np.allclose(lam_g[keep], lam_r[: len(lam_g)][keep],
                           rtol=1e-10, atol=1e-12)

    @given(wave_ensembles())
    @settings(max_examples=40, deadline=None)
    def test_monotone_bounds(self, ensemble):
        grid, waves = ensemble
        m = waves.shape[0]
        spec = stats.ensemble_spectrum(waves, grid.dx)
        s = stats.von_neumann_entropy(spec)
        s_l = stats.linear_entropy(spec)
        k = stats.effective_schmidt_number(spec)
        assert -1e-12 <= s_l <= s + 1e-12
        assert s <= math.log(m) + 1e-10
        assert 1.0 - 1e-10 <= k <= m + 1e-10

    @given(wave_ensembles())
    @settings(max_examples=30, deadline=None)
    def test_variance_identity(self, ensemble):
        grid, waves = ensemble
        g = stats.gram_matrix(waves, grid.dx)
        mean_sq = np.sum(np.abs(waves.mean(axis=0)) ** 2 * grid.weights)
        assert stats.hilbert_variance(g) == pytest.approx(1.0 - mean_sq, abs=1e-12)

    @given(wave_ensembles())
    @settings(max_examples=30, deadline=None)
    def test_purity_three_routes(self, ensemble):
        grid, waves = ensemble
        g = stats.gram_matrix(waves, grid.dx)
        lam = stats.spectrum_from_gram(g).lambdas
        frobenius = np.sum(np.abs(g.entries) ** 2)
        lam_rdm = stats.spectrum_from_rdm(stats.reduced_density_matrix(waves, grid.dx)).lambdas
        assert np.sum(lam**2) == pytest.approx(frobenius, abs=1e-8)
        assert np.sum(lam_rdm**2) == pytest.approx(frobenius, abs=1e-8)

    def test_rank_one_triple(self, rng, grid):
        wave = random_wave_matrix(rng, grid, 1)[0]
        waves = np.tile(wave, (8, 1))
        g = stats.gram_matrix(waves, grid.dx)
        spec = stats.spectrum_from_gram(g)
        assert abs(stats.hilbert_variance(g)) <= 1e-12
        assert stats.von_neumann_entropy(spec) <= 1e-12
        assert stats.effective_schmidt_number(spec) == pytest.approx(1.0, abs=1e-10)

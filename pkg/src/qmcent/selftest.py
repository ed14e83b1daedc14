"""Fast invariant checks behind the ``selftest`` subcommand.

Each check is a small closed-form identity that a correct build satisfies
to tight tolerance; the whole suite runs in about a second and prints one
pass/fail line per check.
"""

from __future__ import annotations

import math

import numpy as np

from . import partition, stats, tdqmc
from .model import SpinConfig, build_system, nuclear_potential, soft_coulomb
from .numerics import (
    ComplexField1D,
    ComplexField2D,
    Grid1D,
    Grid2D,
    hermitian_eigendecompose,
    inner_product,
    normalize,
    schmidt_decompose,
)


def _random_fields(rng, grid, count):
    mats = rng.normal(size=(count, grid.n)) + 1j * rng.normal(size=(count, grid.n))
    mats[:, 0] = mats[:, -1] = 0.0
    norms = np.sqrt(np.sum(np.abs(mats) ** 2 * grid.weights, axis=1))
    return mats / norms[:, None]


def _checks():
    rng = np.random.default_rng(20240817)
    grid = Grid1D(-5.0, 5.0, 64)
    dx = grid.dx
    waves = _random_fields(rng, grid, 6)
    f = ComplexField1D(grid=grid, values=waves[0])
    g = ComplexField1D(grid=grid, values=waves[1])

    yield "inner product: <f,f> = 1 for normalized f", abs(inner_product(f, f) - 1) < 1e-12
    yield "inner product: Hermitian symmetry", (
        abs(inner_product(f, g) - np.conj(inner_product(g, f))) < 1e-12
    )
    two_f = ComplexField1D(grid=grid, values=2 * waves[0])
    yield "normalize: scale invariance", (
        np.allclose(normalize(two_f).values, normalize(f).values, atol=1e-12)
    )

    spec = hermitian_eigendecompose(np.eye(3))
    yield "eigendecompose: identity spectrum", np.allclose(spec.eigenvalues, 1.0)
    spec = hermitian_eigendecompose(np.diag([0.3, 0.7]))
    yield "eigendecompose: descending order", np.allclose(spec.eigenvalues, [0.7, 0.3])

    u, v = waves[0], waves[1]
    v = v - np.sum(v * np.conj(u) * grid.weights) * u
    v /= math.sqrt(np.sum(np.abs(v) ** 2 * grid.weights))
    g2 = Grid2D.square(grid)
    product = ComplexField2D(grid=g2, values=np.outer(u, v))
    lam = schmidt_decompose(product).lambdas
    yield "schmidt: product state is rank one", lam[0] > 1 - 1e-10
    slater = ComplexField2D(grid=g2, values=(np.outer(u, v) - np.outer(v, u)) / math.sqrt(2))
    lam = schmidt_decompose(slater).lambdas
    yield "schmidt: antisymmetric pair gives (1/2, 1/2)", np.allclose(lam[:2], 0.5, atol=1e-10)

    yield "soft coulomb: r=0 contact value", soft_coulomb(0.0, 1.0, -2.0) == -2.0
    yield "soft coulomb: sqrt(3) separation", abs(soft_coulomb(math.sqrt(3), 1.0, -1.0) + 0.5) < 1e-12
    mol = build_system("molecule")
    ven = nuclear_potential(mol)
    yield "molecule potential: mirror symmetry", np.allclose(ven, ven[::-1], atol=1e-12)
    yield "molecule preset: nuclei at +-1.5", mol.nuclei == ((-1.5, 1.0), (1.5, 1.0))

    identical = np.tile(waves[0], (5, 1))
    gm = stats.gram_matrix(identical, dx)
    yield "gram: identical waves give entries 1/M", np.allclose(gm.entries, 0.2, atol=1e-10)
    yield "hilbert variance: identical waves vanish", abs(stats.hilbert_variance(gm)) < 1e-12
    ortho = np.linalg.qr(rng.normal(size=(grid.n, 4)))[0].T / np.sqrt(grid.weights)
    gm_o = stats.gram_matrix(ortho.astype(complex), dx)
    yield "hilbert variance: orthonormal waves give 1 - 1/M", (
        abs(stats.hilbert_variance(gm_o) - 0.75) < 1e-10
    )
    yield "entropy: pure spectrum", stats.von_neumann_entropy(stats.spectrum_from_gram(gm)) < 1e-12
    spec_o = stats.spectrum_from_gram(gm_o)
    yield "entropy: maximally mixed gives ln M", (
        abs(stats.von_neumann_entropy(spec_o) - math.log(4)) < 1e-10
    )
    yield "schmidt number: uniform spectrum gives M", (
        abs(stats.effective_schmidt_number(spec_o) - 4.0) < 1e-10
    )
    phi1 = ComplexField1D(grid=grid, values=u)
    phi2 = ComplexField1D(grid=grid, values=v)
    yield "slater pair entropy: ln 2", (
        abs(stats.slater_pair_entropy(phi1, phi2) - math.log(2)) < 1e-10
    )

    pts = rng.normal(size=(50, 2))
    groups = [pts[:20], pts[20:35], pts[35:]]
    total, mean_local, var_means = stats.variance_decomposition(groups)
    yield "variance decomposition: law of total variance", (
        abs(total - mean_local - var_means) < 1e-12
    )
    single = stats.walker_statistics(np.array([[1.0, 2.0]]))
    yield "walker stats: single point has zero variance", single.variance == 0.0

    strips = partition.make_strips(0.0, 1.0, 4)
    yield "strips: uniform edges", np.allclose(strips.edges, [0, 0.25, 0.5, 0.75, 1.0])
    assign = partition.assign_walkers(strips, np.array([[0.25, 0.0], [1.0, 0.0]]))
    yield "strips: interior edge goes right, last edge stays", (
        assign.membership[0] == 1 and assign.membership[1] == 3
    )

    he = build_system("helium")
    state = tdqmc.init_ensemble(he, 4, seed=5)
    veff = tdqmc.effective_potential(
        tdqmc.WalkerEnsemble(positions=np.array([[0.0, 0.7], [0.0, 0.7], [0.0, 0.7], [0.0, 0.7]])),
        0, 1, he, kernel_width=1.0,
    )
    direct = soft_coulomb(he.grid.points - 0.7, he.a_ee, 1.0)
    yield "effective potential: single partner position is exact", np.allclose(veff, direct, atol=1e-12)
    yield "exchange: zero field for opposite spins", (
        np.all(tdqmc.exchange_term(state.waves, 0, 1, he) == 0.0)
    )
    par = build_system("helium", {"spin": SpinConfig.PARALLEL})
    par_state = tdqmc.init_ensemble(par, 3, seed=5)
    ov = np.abs(np.sum(par_state.waves.electron(1) * np.conj(par_state.waves.electron(2))
                       * he.grid.weights, axis=1))
    yield "parallel init: per-walker orbital orthogonality", np.all(ov < 1e-10)


def run_selftest(report=print) -> bool:
    """Run all checks; returns True when everything passed."""
    all_ok = True
    for name, ok in _checks():
        report(f"[{'PASS' if ok else 'FAIL'}] {name}")
        all_ok &= bool(ok)
    return all_ok

"""Guide-wave quantum Monte Carlo engine for two 1D electrons.

M walkers evolve concurrently with M pairs of one-body guide waves. Each
wave relaxes in imaginary time under an effective Hamiltonian whose
electron-electron part is a kernel-weighted Monte Carlo convolution over
the partner's walker cloud, anchored at the owning walker's partner
coordinate. Parallel-spin runs add the nonlocal exchange term and keep the
per-walker orbital pair orthonormal.

The kernel width interpolates between near-pairwise interactions (narrow)
and the mean-field limit (wide, all effective potentials coincide).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import propagation
from .errors import (
    ConvergenceError,
    DegenerateWeightError,
    InstabilityError,
    ParameterError,
)
from .model import SpinConfig, SystemModel, electron_repulsion, nuclear_potential
from .numerics import ComplexField1D, Grid1D
from .rng import STREAM_METROPOLIS, STREAM_WALKER_INIT, substream

N_ELECTRONS = 2

KERNEL_POLICY_FACTOR = 0.7  # auto width = factor * partner-cloud std
KERNEL_REFRESH_EVERY = 50
CONVERGENCE_WINDOW = 100
EXCHANGE_EPS_FACTOR = 1e-6  # node regularization scale, relative to max|phi|


@dataclass(frozen=True)
class WalkerEnsemble:
    """M configuration-space points, one coordinate per electron."""

    positions: np.ndarray  # (M, 2)

    def __post_init__(self):
        object.__setattr__(self, "positions",
                           np.atleast_2d(np.asarray(self.positions, dtype=float)))
        if self.positions.shape[0] < 1 or self.positions.shape[1] != N_ELECTRONS:
            raise ParameterError(f"walker array must be (M, 2), got {self.positions.shape}")

    @property
    def m(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class GuideWaveEnsemble:
    """M normalized one-body waves per electron on a shared grid."""

    grid: Grid1D
    spin: SpinConfig
    values: np.ndarray  # (M, 2, n) complex

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
        if self.values.ndim != 3 or self.values.shape[1] != N_ELECTRONS \
                or self.values.shape[2] != self.grid.n:
            raise ParameterError(f"wave array must be (M, 2, {self.grid.n})")

    @property
    def m(self) -> int:
        return self.values.shape[0]

    def electron(self, i: int) -> np.ndarray:
        """All M waves of electron i (1-based), shape (M, n)."""
        return self.values[:, i - 1, :]

    def field(self, k: int, i: int) -> ComplexField1D:
        return ComplexField1D(grid=self.grid, values=self.values[k, i - 1].copy())


@dataclass(frozen=True)
class TdqmcState:
    walkers: WalkerEnsemble
    waves: GuideWaveEnsemble
    tau: float
    energy_estimate: float
    kernel_width: float

    def __post_init__(self):
        if self.walkers.m != self.waves.m:
            raise ParameterError(
                f"{self.walkers.m} walkers for {self.waves.m} wave sets"
            )
        if not self.kernel_width > 0:
            raise ParameterError("kernel_width must be positive")


def _normalize_rows(mat: np.ndarray, weights: np.ndarray) -> np.ndarray:
    norms = np.sqrt(np.sum(np.abs(mat) ** 2 * weights, axis=-1))
    return mat / norms[..., None]


def _sample_from_density(density: np.ndarray, grid: Grid1D, count: int,
                         rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draws from a gridded density (piecewise-constant cells)."""
    cell_mass = 0.5 * (density[:-1] + density[1:]) * grid.dx
    cdf = np.cumsum(cell_mass)
    cdf /= cdf[-1]
    u = rng.random(count)
    cells = np.searchsorted(cdf, u)
    lo = np.concatenate([[0.0], cdf[:-1]])
    within = (u - lo[cells]) / (cdf[cells] - lo[cells])
    return grid.x_min + (cells + within) * grid.dx


def auto_kernel_width(walkers: WalkerEnsemble) -> float:
    """Policy width: a fixed fraction of the walker-cloud standard deviation."""
    stds = np.std(walkers.positions, axis=0)
    width = KERNEL_POLICY_FACTOR * float(np.mean(stds))
    return max(width, 1e-3)


def init_ensemble(model: SystemModel, m: int, seed: int) -> TdqmcState:
    """Gaussian guide waves plus walkers drawn from their densities.

    All walkers share the same initial wave per electron (rank-one Gram
    matrix). Parallel spins start the second orbital as an odd function so
    the per-walker pair is orthogonal from the outset.
    """
    if m < 2:
        raise ParameterError(f"ensemble statistics need M >= 2 walkers, got {m}")
    grid = model.grid
    x = grid.points
    if model.nuclei:
        center = sum(p * c for p, c in model.nuclei) / sum(c for _, c in model.nuclei)
    else:
        center = 0.0
    g = np.exp(-0.5 * (x - center) ** 2)
    g[0] = g[-1] = 0.0
    phi1 = _normalize_rows(g.astype(complex), grid.weights)
    if model.spin is SpinConfig.PARALLEL:
        h = (x - center) * np.exp(-0.5 * (x - center) ** 2)
        h[0] = h[-1] = 0.0
        phi2 = _normalize_rows(h.astype(complex), grid.weights)
    else:
        phi2 = phi1.copy()

    values = np.empty((m, N_ELECTRONS, grid.n), dtype=complex)
    values[:, 0, :] = phi1
    values[:, 1, :] = phi2

    rng = substream(seed, STREAM_WALKER_INIT)
    positions = np.empty((m, N_ELECTRONS))
    positions[:, 0] = _sample_from_density(np.abs(phi1) ** 2, grid, m, rng)
    positions[:, 1] = _sample_from_density(np.abs(phi2) ** 2, grid, m, rng)

    walkers = WalkerEnsemble(positions=positions)
    return TdqmcState(
        walkers=walkers,
        waves=GuideWaveEnsemble(grid=grid, spin=model.spin, values=values),
        tau=0.0,
        energy_estimate=math.nan,
        kernel_width=auto_kernel_width(walkers),
    )


def _effective_potential_batch(positions: np.ndarray, electron: int,
                               model: SystemModel, kernel_width: float) -> np.ndarray:
    """Kernel-weighted partner-cloud potential for every walker, shape (M, n).

    Row k is the potential felt by electron ``electron`` of walker k: the
    partner's pairwise potentials averaged with Gaussian weights centered
    on walker k's partner coordinate.
    """
    if not kernel_width > 0:
        raise ParameterError("kernel_width must be positive")
    x = model.grid.points
    partner = positions[:, 2 - electron]  # 1-based electron index; partner column
    pair_pot = electron_repulsion(model, x[None, :] - partner[:, None])  # (M, n)
    delta = partner[None, :] - partner[:, None]
    weights = np.exp(-0.5 * (delta / kernel_width) ** 2)  # (M, M), diag = 1
    totals = weights.sum(axis=1)
    if not np.all(np.isfinite(totals)) or np.any(totals <= 0.0):
        raise DegenerateWeightError(
            "kernel weights degenerate; kernel_width far below the walker spread"
        )
    return (weights / totals[:, None]) @ pair_pot


def effective_potential(walkers: WalkerEnsemble, k: int, electron: int,
                        model: SystemModel, kernel_width: float) -> np.ndarray:
    """Effective partner potential on the grid for one walker and electron."""
    batch = _effective_potential_batch(walkers.positions, electron, model, kernel_width)
    return batch[k]


def _pair_potential_matrix(model: SystemModel) -> np.ndarray:
    x = model.grid.points
    return electron_repulsion(model, x[:, None] - x[None, :])


def _exchange_batch(waves: GuideWaveEnsemble, electron: int, model: SystemModel,
                    pair_matrix: np.ndarray | None = None) -> np.ndarray:
    """Nonlocal exchange potential field for every walker, shape (M, n).

    W_k(r) = [int V_ee(r - r') phi_i(r') phi_j*(r') dr'] * phi_j(r) / phi_i(r),
    with the reciprocal regularized as conj(phi)/(|phi|^2 + eps^2) so the
    field stays bounded at nodes.
    """
    if waves.spin is not SpinConfig.PARALLEL:
        return np.zeros((waves.m, waves.grid.n))
    if pair_matrix is None:
        pair_matrix = _pair_potential_matrix(model)
    phi_i = waves.electron(electron)
    phi_j = waves.electron(3 - electron)
    product = phi_i * np.conj(phi_j) * waves.grid.weights  # (M, n)
    overlap_integral = product @ pair_matrix  # (M, n); symmetric kernel
    eps = EXCHANGE_EPS_FACTOR * np.max(np.abs(phi_i), axis=1, keepdims=True)
    recip = np.conj(phi_i) / (np.abs(phi_i) ** 2 + eps**2)
    return overlap_integral * phi_j * recip


def exchange_term(waves: GuideWaveEnsemble, k: int, electron: int,
                  model: SystemModel) -> np.ndarray:
    """Exchange potential field for one walker; zero field for opposite spins."""
    return _exchange_batch(waves, electron, model)[k]


def _orthonormalize_pairs(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Keep phi_1, project it out of phi_2, renormalize both."""
    phi1 = _normalize_rows(values[:, 0, :], weights)
    phi2 = values[:, 1, :]
    overlap = np.sum(phi2 * np.conj(phi1) * weights, axis=1)
    phi2 = phi2 - overlap[:, None] * phi1
    phi2 = _normalize_rows(phi2, weights)
    out = np.empty_like(values)
    out[:, 0, :] = phi1
    out[:, 1, :] = phi2
    return out


def propagate_step(state: TdqmcState, model: SystemModel, dtau: float) -> TdqmcState:
    """Advance every guide wave one imaginary-time step.

    Strang split over the local parts (kinetic + nuclear + effective
    potential); the parallel-spin exchange term is applied in its bounded
    product form as a first-order source. Waves are renormalized and, for
    parallel spins, pairwise re-orthonormalized.
    """
    if not 0.0 < dtau <= 0.05:
        raise ParameterError(f"dtau must lie in (0, 0.05], got {dtau}")
    grid = model.grid
    weights = grid.weights
    v_en = nuclear_potential(model)
    kin = propagation.kinetic_factor(grid, dtau)
    parallel = model.spin is SpinConfig.PARALLEL
    pair_matrix = _pair_potential_matrix(model) if parallel else None

    v_eff = {
        electron: _effective_potential_batch(
            state.walkers.positions, electron, model, state.kernel_width
        )
        for electron in (1, 2)
    }

    new_values = np.empty_like(state.waves.values)
    for electron in (1, 2):
        phi = state.waves.electron(electron)
        half = np.exp(-0.5 * dtau * (v_en[None, :] + v_eff[electron]))
        stepped = half * phi
        stepped = propagation.apply_kinetic_exponential(stepped, kin)
        stepped = half * stepped
        if parallel:
            exchange = _exchange_batch(state.waves, electron, model, pair_matrix)
            stepped = stepped + dtau * exchange * phi
        norms_sq = np.sum(np.abs(stepped) ** 2 * weights, axis=1)
        bad = ~np.isfinite(norms_sq) | (norms_sq > 1e12) | (norms_sq <= 0.0)
        if np.any(bad):
            k = int(np.flatnonzero(bad)[0])
            raise InstabilityError(
                f"guide wave of walker {k}, electron {electron} became unstable "
                f"(norm^2 = {norms_sq[k]!r})",
                walker=k,
            )
        new_values[:, electron - 1, :] = stepped / np.sqrt(norms_sq)[:, None]

    if parallel:
        new_values = _orthonormalize_pairs(new_values, weights)
        waves_new = GuideWaveEnsemble(grid=grid, spin=model.spin, values=new_values)

    # energy estimator on the updated waves; the pair interaction is shared
    # between the two electrons, so it enters with weight 1/2
    per_walker = np.zeros(state.waves.m)
    for electron in (1, 2):
        phi = new_values[:, electron - 1, :]
        t_phi = propagation.apply_kinetic_operator(phi, grid)
        per_walker += np.real(
            np.sum(np.conj(phi) * (t_phi + v_en[None, :] * phi) * weights, axis=1)
        )
        interaction = np.real(np.sum(np.conj(phi) * v_eff[electron] * phi * weights, axis=1))
        if parallel:
            exchange = _exchange_batch(waves_new, electron, model, pair_matrix)
            interaction -= np.real(np.sum(np.conj(phi) * exchange * phi * weights, axis=1))
        per_walker += 0.5 * interaction
    return TdqmcState(
        walkers=state.walkers,
        waves=GuideWaveEnsemble(grid=grid, spin=model.spin, values=new_values),
        tau=state.tau + dtau,
        energy_estimate=float(np.mean(per_walker)),
        kernel_width=state.kernel_width,
    )


def _interp_rows(values: np.ndarray, grid: Grid1D, x: np.ndarray) -> np.ndarray:
    """Per-row linear interpolation of (M, n) data at (M,) points."""
    f = (x - grid.x_min) / grid.dx
    idx = np.clip(f.astype(int), 0, grid.n - 2)
    t = f - idx
    rows = np.arange(values.shape[0])
    return values[rows, idx] * (1.0 - t) + values[rows, idx + 1] * t


def resample_walkers(state: TdqmcState, moves_per_step: int,
                     rng: np.random.Generator,
                     proposal_width: float = 0.3) -> TdqmcState:
    """Metropolis-update each walker coordinate toward |phi_i^k|^2.

    Every walker samples its own guide wave's density; proposals leaving
    the grid are rejected, so positions stay inside the box.
    """
    if moves_per_step < 1:
        raise ParameterError(f"moves_per_step must be >= 1, got {moves_per_step}")
    grid = state.waves.grid
    positions = state.walkers.positions.copy()
    m = positions.shape[0]
    for electron in (1, 2):
        density = np.abs(state.waves.electron(electron)) ** 2
        col = electron - 1
        current = _interp_rows(density, grid, positions[:, col])
        for _ in range(moves_per_step):
            proposal = positions[:, col] + rng.normal(0.0, proposal_width, size=m)
            inside = (proposal >= grid.x_min) & (proposal <= grid.x_max)
            prob = np.zeros(m)
            prob[inside] = _interp_rows(density[inside], grid, proposal[inside])
            accept = rng.random(m) * current < prob
            positions[accept, col] = proposal[accept]
            current[accept] = prob[accept]
    return replace(state, walkers=WalkerEnsemble(positions=positions))


def run_to_convergence(
    model: SystemModel,
    m: int = 500,
    dtau: float = 0.01,
    kernel_width: float | None = None,
    seed: int = 1,
    max_steps: int = 6000,
    energy_tol: float = 1e-5,
    moves_per_step: int = 1,
    proposal_width: float = 0.1,
    min_steps: int = 1500,
) -> TdqmcState:
    """Alternate wave propagation and walker moves until the energy settles.

    ``kernel_width=None`` follows the adaptive policy (0.7 x partner-cloud
    std, refreshed every 50 steps); a float pins the width. Convergence is
    declared when the trailing-mean energy drifts less than ``energy_tol``
    per step across a 100-step window. The energy settles well before the
    ensemble's functional spread does, so the drift rule only arms after
    ``min_steps`` steps.
    """
    state = init_ensemble(model, m, seed)
    if kernel_width is not None:
        if not kernel_width > 0:
            raise ParameterError("kernel_width must be positive")
        state = replace(state, kernel_width=float(kernel_width))
    rng = substream(seed, STREAM_METROPOLIS)

    window = CONVERGENCE_WINDOW
    energies: list[float] = []
    drift_history: list[float] = []
    for step in range(1, max_steps + 1):
        state = propagate_step(state, model, dtau)
        state = resample_walkers(state, moves_per_step, rng, proposal_width)
        if kernel_width is None and step % KERNEL_REFRESH_EVERY == 0:
            state = replace(state, kernel_width=auto_kernel_width(state.walkers))
        energies.append(state.energy_estimate)
        if step >= max(min_steps, 2 * window):
            recent = np.mean(energies[-window:])
            earlier = np.mean(energies[-2 * window:-window])
            drift = abs(recent - earlier) / window
            drift_history.append(drift)
            if drift < energy_tol:
                return replace(state, energy_estimate=float(recent))
    raise ConvergenceError(
        f"TDQMC run did not converge in {max_steps} steps "
        f"(last drift {drift_history[-1] if drift_history else math.nan:.3e} per step)",
        drift_history=drift_history[-100:],
    )

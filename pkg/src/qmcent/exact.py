"""Numerically exact two-body reference on the full 2D grid.

Imaginary-time propagation of the two-electron Schrödinger equation with
Strang splitting projects onto the lowest state of the requested exchange
sector (symmetrization is re-applied every step). The converged field feeds
three consumers: the global Schmidt spectrum, Metropolis sampling of the
configuration-space density, and strict conditional waves sliced at the
sampled partner coordinates.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import propagation, stats
from .errors import (
    ConvergenceError,
    DegenerateInputError,
    DegenerateSliceError,
    ParameterError,
)
from .model import SystemModel, electron_repulsion, nuclear_potential
from .numerics import ComplexField2D, Grid1D, Grid2D, SchmidtSpectrum, schmidt_decompose
from .rng import STREAM_EXACT_SAMPLER, substream


class Symmetry(enum.Enum):
    SYMMETRIC = "symmetric"
    ANTISYMMETRIC = "antisymmetric"

    @property
    def sign(self) -> float:
        return 1.0 if self is Symmetry.SYMMETRIC else -1.0


@dataclass
class TwoBodyState:
    psi: ComplexField2D
    energy: float
    symmetry: Symmetry
    converged: bool
    iterations: int


@dataclass
class ConditionalWaveSet:
    """Normalized slices of the two-body field at the sampled anchors."""

    values: np.ndarray  # (M, n) complex
    anchors: np.ndarray  # (M,) conditioning coordinates
    grid: Grid1D
    electron: int


def total_potential(model: SystemModel) -> np.ndarray:
    """V(x, y) = V_en(x) + V_en(y) + V_ee(x - y) on the square grid."""
    v1 = nuclear_potential(model)
    x = model.grid.points
    vee = electron_repulsion(model, x[:, None] - x[None, :])
    return v1[:, None] + v1[None, :] + vee


def apply_hamiltonian(values: np.ndarray, model: SystemModel,
                      potential: np.ndarray | None = None) -> np.ndarray:
    """(T + V) psi on the 2D grid."""
    if potential is None:
        potential = total_potential(model)
    out = propagation.apply_kinetic_operator_2d(values, model.grid, model.grid)
    out += potential * values
    return out


def state_energy(values: np.ndarray, model: SystemModel,
                 potential: np.ndarray | None = None) -> float:
    """<psi|H|psi> for a unit-norm field."""
    w = model.grid.weights
    h_psi = apply_hamiltonian(values, model, potential)
    return float(np.real(np.sum(np.conj(values) * h_psi * np.outer(w, w))))


def _symmetrize(values: np.ndarray, symmetry: Symmetry) -> np.ndarray:
    return 0.5 * (values + symmetry.sign * values.T)


def _initial_guess(model: SystemModel, symmetry: Symmetry) -> np.ndarray:
    x = model.grid.points
    if model.nuclei:
        center = sum(p * c for p, c in model.nuclei) / sum(c for _, c in model.nuclei)
    else:
        center = 0.0
    if symmetry is Symmetry.SYMMETRIC:
        g = np.exp(-((x - center) ** 2) / 2.0)
        psi = np.outer(g, g)
    else:
        # distinct Gaussians offset by +-1 a.u. guarantee overlap with the sector
        g = np.exp(-((x - center - 1.0) ** 2) / 2.0)
        h = np.exp(-((x - center + 1.0) ** 2) / 2.0)
        psi = np.outer(g, h) - np.outer(h, g)
    psi[0, :] = psi[-1, :] = 0.0
    psi[:, 0] = psi[:, -1] = 0.0
    return psi.astype(complex)


def imaginary_time_ground_state(
    model: SystemModel,
    symmetry: Symmetry = Symmetry.SYMMETRIC,
    dtau: float = 0.01,
    max_steps: int = 50_000,
    energy_tol: float = 1e-9,
    initial: np.ndarray | None = None,
) -> TwoBodyState:
    """Relax to the lowest state of the requested exchange sector.

    Strang split exp(-dtau V/2) exp(-dtau T) exp(-dtau V/2) per step, with
    renormalization and (anti)symmetrization after every step. Stops once
    the energy moves less than ``energy_tol`` per step.
    """
    if not 0.0 < dtau <= 0.05:
        raise ParameterError(f"dtau must lie in (0, 0.05], got {dtau}")
    grid = model.grid
    w2d = np.outer(grid.weights, grid.weights)
    potential = total_potential(model)
    half_v = np.exp(-0.5 * dtau * potential)
    kin = propagation.kinetic_factor(grid, dtau)

    psi = _initial_guess(model, symmetry) if initial is None else np.array(initial, dtype=complex)
    psi = _symmetrize(psi, symmetry)
    nsq = np.sum(np.abs(psi) ** 2 * w2d)
    if nsq < 1e-12:
        raise DegenerateInputError(
            f"initial guess is annihilated by the {symmetry.value} projection"
        )
    psi /= math.sqrt(nsq)

    energy = state_energy(psi, model, potential)
    drift_history: list[float] = []
    for step in range(1, max_steps + 1):
        psi = half_v * psi
        psi = propagation.apply_kinetic_exponential_2d(psi, kin, kin)
        psi = half_v * psi
        psi = _symmetrize(psi, symmetry)
        nsq = np.sum(np.abs(psi) ** 2 * w2d)
        if not np.isfinite(nsq) or nsq < 1e-250:
            raise DegenerateInputError("two-body state collapsed during propagation")
        psi /= math.sqrt(nsq)
        new_energy = state_energy(psi, model, potential)
        drift = abs(new_energy - energy)
        drift_history.append(drift)
        energy = new_energy
        if drift < energy_tol:
            return TwoBodyState(
                psi=ComplexField2D(grid=Grid2D.square(grid), values=psi),
                energy=energy,
                symmetry=symmetry,
                converged=True,
                iterations=step,
            )
    raise ConvergenceError(
        f"imaginary-time propagation did not converge in {max_steps} steps "
        f"(last energy drift {drift_history[-1]:.3e})",
        drift_history=drift_history[-100:],
    )


@dataclass
class GlobalSchmidt:
    spectrum: SchmidtSpectrum
    entropy: float
    linear_entropy: float


def global_schmidt(state: TwoBodyState) -> GlobalSchmidt:
    """Schmidt spectrum and entropies of the converged two-body state."""
    spec = schmidt_decompose(state.psi)
    return GlobalSchmidt(
        spectrum=spec,
        entropy=stats.von_neumann_entropy(spec),
        linear_entropy=stats.linear_entropy(spec),
    )


def _bilinear_density(density: np.ndarray, grid, x: float, y: float) -> float:
    """|psi|^2 interpolated between grid nodes; zero outside the box."""
    if not (grid.x_min <= x <= grid.x_max and grid.x_min <= y <= grid.x_max):
        return 0.0
    dx = grid.dx
    fx = (x - grid.x_min) / dx
    fy = (y - grid.x_min) / dx
    i = min(int(fx), grid.n - 2)
    j = min(int(fy), grid.n - 2)
    tx = fx - i
    ty = fy - j
    return float(
        density[i, j] * (1 - tx) * (1 - ty)
        + density[i + 1, j] * tx * (1 - ty)
        + density[i, j + 1] * (1 - tx) * ty
        + density[i + 1, j + 1] * tx * ty
    )


def sample_walkers(
    state: TwoBodyState,
    m: int,
    seed: int,
    burn_in: int = 2000,
    thin: int = 10,
    proposal_width: float = 0.5,
) -> np.ndarray:
    """Metropolis sample of M configuration-space points from |psi|^2.

    Positions are continuous (bilinear interpolation between nodes) and
    deterministic for a given seed. Returns an (M, 2) array.
    """
    if m < 1:
        raise ParameterError(f"need at least one walker, got {m}")
    grid = state.psi.grid.gx
    density = np.abs(state.psi.values) ** 2
    rng = substream(seed, STREAM_EXACT_SAMPLER)

    flat_peak = int(np.argmax(density))
    xi, yi = np.unravel_index(flat_peak, density.shape)
    pos = np.array([grid.points[xi], grid.points[yi]])
    p_cur = _bilinear_density(density, grid, pos[0], pos[1])

    out = np.empty((m, 2))
    collected = 0
    step_idx = 0
    total_steps = burn_in + m * thin
    steps = rng.normal(0.0, proposal_width, size=(total_steps, 2))
    accepts = rng.random(total_steps)
    while collected < m:
        prop = pos + steps[step_idx]
        p_new = _bilinear_density(density, grid, prop[0], prop[1])
        if p_cur <= 0.0 or accepts[step_idx] * p_cur < p_new:
            pos = prop
            p_cur = p_new
        step_idx += 1
        if step_idx > burn_in and (step_idx - burn_in) % thin == 0:
            out[collected] = pos
            collected += 1
    return out


def conditional_waves(state: TwoBodyState, walkers: np.ndarray,
                      electron: int = 1) -> ConditionalWaveSet:
    """Strict conditional waves at the walkers' partner coordinates.

    For electron 1 the k-th wave is psi(x, y_k) normalized, anchored at
    y_k (linear interpolation between the two neighboring grid columns);
    electron 2 uses slices psi(x_k, y) anchored at x_k.
    """
    if electron not in (1, 2):
        raise ParameterError(f"electron index must be 1 or 2, got {electron}")
    walkers = np.atleast_2d(np.asarray(walkers, dtype=float))
    grid = state.psi.grid.gx
    psi = state.psi.values if electron == 1 else state.psi.values.T
    anchors = walkers[:, 1] if electron == 1 else walkers[:, 0]

    frac = (anchors - grid.x_min) / grid.dx
    idx = np.clip(frac.astype(int), 0, grid.n - 2)
    t = frac - idx
    waves = psi[:, idx] * (1.0 - t) + psi[:, idx + 1] * t  # (n, M)
    waves = waves.T.copy()

    norms_sq = np.sum(np.abs(waves) ** 2 * grid.weights, axis=1)
    bad = np.flatnonzero(norms_sq < 1e-24)
    if len(bad):
        raise DegenerateSliceError(
            f"conditional slice at anchor {anchors[bad[0]]:.4f} has vanishing norm",
            walker=int(bad[0]),
        )
    waves /= np.sqrt(norms_sq)[:, None]
    return ConditionalWaveSet(values=waves, anchors=anchors, grid=grid, electron=electron)

"""Physical systems: soft-core potentials, nuclear geometry, spin configuration.

Two presets are provided: a 1D helium atom (one nucleus, charge 2) and a
1D hydrogen-like molecule (two unit charges 3 a.u. apart). Custom systems
with an arbitrary nucleus list and an optional harmonic confinement are
supported for analytic cross-checks.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ParameterError
from .numerics import Grid1D


class SpinConfig(enum.Enum):
    """Relative spin of the two electrons.

    Parallel spins activate the exchange term and the per-walker
    orthonormality constraint of the guide-wave engine; opposite spins
    deactivate both.
    """

    OPPOSITE = "opposite"
    PARALLEL = "parallel"


@dataclass(frozen=True)
class SystemModel:
    """A two-electron 1D system on a fixed grid.

    ``ee_coupling`` is the charge product of the electron-electron term;
    0 turns the interaction off. ``omega`` adds a harmonic confinement
    0.5 * omega^2 * x^2 (used by analytic oracle systems).
    """

    name: str
    nuclei: tuple[tuple[float, float], ...]  # (position, charge) pairs
    a_en: float
    a_ee: float
    spin: SpinConfig
    grid: Grid1D
    ee_coupling: float = 1.0
    omega: float = 0.0

    def __post_init__(self):
        if self.a_en <= 0 or self.a_ee <= 0:
            raise ParameterError("softening lengths a_en, a_ee must be positive")
        for pos, charge in self.nuclei:
            if charge <= 0:
                raise ParameterError(f"nuclear charge must be positive, got {charge} at {pos}")
        if self.omega < 0:
            raise ParameterError("harmonic confinement omega must be >= 0")


def soft_coulomb(r, a: float, q: float):
    """Soft-core Coulomb energy q / sqrt(r^2 + a^2); r may be an array."""
    if a <= 0:
        raise ParameterError(f"softening length must be positive, got {a}")
    return q / np.sqrt(np.square(r) + a * a)


def nuclear_potential(model: SystemModel) -> np.ndarray:
    """One-electron external potential on the model grid.

    Sum of attractive soft-core terms for each nucleus, plus the harmonic
    confinement when the model carries one.
    """
    x = model.grid.points
    v = np.zeros_like(x)
    for pos, charge in model.nuclei:
        v += soft_coulomb(x - pos, model.a_en, -charge)
    if model.omega > 0:
        v += 0.5 * model.omega**2 * x**2
    return v


def electron_repulsion(model: SystemModel, separation):
    """Electron-electron energy at the given separation(s)."""
    if model.ee_coupling == 0.0:
        return np.zeros_like(np.asarray(separation, dtype=float))
    return soft_coulomb(separation, model.a_ee, model.ee_coupling)


_PRESET_GRIDS = {
    "helium": Grid1D(-10.0, 10.0, 256),
    "molecule": Grid1D(-12.0, 12.0, 288),
    "custom": Grid1D(-10.0, 10.0, 256),
}

_ALLOWED_OVERRIDES = {
    "a_en", "a_ee", "ee_coupling", "omega", "spin",
    "bond_length", "nuclei", "grid_min", "grid_max", "grid_n",
}


def build_system(preset: str, overrides: dict | None = None) -> SystemModel:
    """Construct a SystemModel from a preset name plus overrides.

    Presets: ``helium`` (one nucleus at 0, charge 2), ``molecule`` (charges 1
    at +-bond_length/2, default 3 a.u. apart), ``custom`` (explicit nuclei
    list, default none). Unknown presets and unknown override keys raise.
    """
    overrides = dict(overrides or {})
    preset = preset.lower()
    if preset not in _PRESET_GRIDS:
        raise ParameterError(f"unknown system preset {preset!r}")
    unknown = set(overrides) - _ALLOWED_OVERRIDES
    if unknown:
        raise ParameterError(f"unknown override key(s): {', '.join(sorted(unknown))}")

    base = _PRESET_GRIDS[preset]
    grid = Grid1D(
        float(overrides.pop("grid_min", base.x_min)),
        float(overrides.pop("grid_max", base.x_max)),
        int(overrides.pop("grid_n", base.n)),
    )

    spin = overrides.pop("spin", SpinConfig.OPPOSITE)
    if isinstance(spin, str):
        spin = SpinConfig(spin.lower())

    bond = float(overrides.pop("bond_length", 3.0))
    if preset == "helium":
        if "nuclei" in overrides:
            raise ParameterError("helium preset fixes its nucleus; use the custom preset")
        nuclei = ((0.0, 2.0),)
    elif preset == "molecule":
        if "nuclei" in overrides:
            raise ParameterError("molecule preset fixes its nuclei; use the custom preset")
        if bond <= 0:
            raise ParameterError(f"bond_length must be positive, got {bond}")
        nuclei = ((-bond / 2.0, 1.0), (bond / 2.0, 1.0))
    else:
        nuclei = tuple((float(p), float(c)) for p, c in overrides.pop("nuclei", ()))

    return SystemModel(
        name=preset,
        nuclei=nuclei,
        a_en=float(overrides.pop("a_en", 1.0)),
        a_ee=float(overrides.pop("a_ee", 1.0)),
        spin=spin,
        grid=grid,
        ee_coupling=float(overrides.pop("ee_coupling", 1.0)),
        omega=float(overrides.pop("omega", 0.0)),
    )

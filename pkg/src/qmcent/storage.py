"""On-disk formats for states, ensembles, walkers and profiles.

All files are plain text with ``#``-prefixed header lines so expensive
solves can be cached and re-analyzed. Floats are written with shortest
round-trip ``repr``, which keeps re-runs byte-identical. Every writer goes
through an atomic temp-file/rename so failed runs leave no partial output.

Formats (also documented in the README):

* ``.field2d``  two-body state: header (grid, energy, symmetry, iterations),
  then one ``re,im`` pair per line, row-major over (x, y).
* ``.ensemble`` guide-wave ensemble: header (grid, M, spin), then M blocks of
  2 x n ``re,im`` lines (electron 1 rows first within each block).
* ``walkers.csv`` columns ``k,x1,x2``.
* ``profile.csv`` columns ``alpha,x_center,m_alpha,sigma,S,S_L,K_eff,
  lambda1..lambda8`` (global row has alpha = -1); JSON mirror carries the
  full spectra.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .exact import Symmetry, TwoBodyState
from .model import SpinConfig
from .numerics import ComplexField2D, Grid1D, Grid2D
from .partition import GLOBAL_ALPHA, EntanglementProfile, ProfileRow, SPECTRUM_COLUMNS
from .tdqmc import GuideWaveEnsemble


def fmt(value) -> str:
    """Shortest round-trip decimal representation of a float."""
    return repr(float(value))


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _header_lines(kind: str, meta: dict) -> list[str]:
    lines = [f"# qmcent-{kind} 1"]
    for key, value in meta.items():
        lines.append(f"# {key}={value}")
    return lines


def _parse_header(lines: list[str], kind: str) -> dict:
    if not lines or not lines[0].startswith(f"# qmcent-{kind} "):
        raise ConfigError(f"not a qmcent {kind} file")
    meta = {}
    for line in lines[1:]:
        if not line.startswith("#"):
            break
        key, _, value = line[1:].strip().partition("=")
        meta[key.strip()] = value.strip()
    return meta


def _grid_token(grid: Grid1D) -> str:
    return f"{fmt(grid.x_min)},{fmt(grid.x_max)},{grid.n}"


def _grid_from_token(token: str) -> Grid1D:
    lo, hi, n = token.split(",")
    return Grid1D(float(lo), float(hi), int(n))


def save_state(path: Path, state: TwoBodyState, config_hash: str = "") -> None:
    grid = state.psi.grid.gx
    meta = {
        "config_hash": config_hash,
        "grid": _grid_token(grid),
        "energy": fmt(state.energy),
        "symmetry": state.symmetry.value,
        "converged": int(state.converged),
        "iterations": state.iterations,
    }
    lines = _header_lines("field2d", meta)
    flat = state.psi.values.ravel()
    lines.extend(f"{fmt(v.real)},{fmt(v.imag)}" for v in flat)
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_state(path: Path) -> tuple[TwoBodyState, str]:
    lines = Path(path).read_text().splitlines()
    meta = _parse_header(lines, "field2d")
    grid = _grid_from_token(meta["grid"])
    data = np.loadtxt([l for l in lines if not l.startswith("#")], delimiter=",")
    values = (data[:, 0] + 1j * data[:, 1]).reshape(grid.n, grid.n)
    state = TwoBodyState(
        psi=ComplexField2D(grid=Grid2D.square(grid), values=values),
        energy=float(meta["energy"]),
        symmetry=Symmetry(meta["symmetry"]),
        converged=bool(int(meta["converged"])),
        iterations=int(meta["iterations"]),
    )
    return state, meta.get("config_hash", "")


def save_ensemble(path: Path, waves: GuideWaveEnsemble, config_hash: str = "",
                  extra: dict | None = None) -> None:
    meta = {
        "config_hash": config_hash,
        "grid": _grid_token(waves.grid),
        "m": waves.m,
        "spin": waves.spin.value,
    }
    meta.update(extra or {})
    lines = _header_lines("ensemble", meta)
    for k in range(waves.m):
        for e in range(2):
            row = waves.values[k, e]
            lines.append(";".join(f"{fmt(v.real)},{fmt(v.imag)}" for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_ensemble(path: Path) -> tuple[GuideWaveEnsemble, dict]:
    lines = Path(path).read_text().splitlines()
    meta = _parse_header(lines, "ensemble")
    grid = _grid_from_token(meta["grid"])
    m = int(meta["m"])
    spin = SpinConfig(meta["spin"])
    rows = [l for l in lines if not l.startswith("#")]
    values = np.empty((m, 2, grid.n), dtype=complex)
    for k in range(m):
        for e in range(2):
            pairs = rows[2 * k + e].split(";")
            arr = np.array([complex(float(p.split(",")[0]), float(p.split(",")[1]))
                            for p in pairs])
            values[k, e] = arr
    return GuideWaveEnsemble(grid=grid, spin=spin, values=values), meta


def save_walkers(path: Path, positions: np.ndarray, config_hash: str = "") -> None:
    lines = [f"# config_hash={config_hash}", "k,x1,x2"]
    for k, (x1, x2) in enumerate(np.atleast_2d(positions)):
        lines.append(f"{k},{fmt(x1)},{fmt(x2)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_walkers(path: Path) -> np.ndarray:
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#") or line.startswith("k,"):
            continue
        _, x1, x2 = line.split(",")
        rows.append((float(x1), float(x2)))
    return np.array(rows)


def _row_cells(row: ProfileRow) -> list[str]:
    cells = [str(row.alpha),
             fmt(row.x_center) if np.isfinite(row.x_center) else "",
             str(row.m_alpha)]
    for value in (row.sigma, row.entropy, row.linear_entropy, row.schmidt_number):
        cells.append("" if value is None else fmt(value))
    for lam in row.top_lambdas(SPECTRUM_COLUMNS):
        cells.append("" if lam is None else fmt(lam))
    return cells


def profile_csv_text(profile: EntanglementProfile, config_hash: str = "") -> str:
    header = ["alpha", "x_center", "m_alpha", "sigma", "S", "S_L", "K_eff"]
    header += [f"lambda{i + 1}" for i in range(SPECTRUM_COLUMNS)]
    lines = [f"# config_hash={config_hash}", ",".join(header)]
    for row in profile.rows:
        lines.append(",".join(_row_cells(row)))
    lines.append(",".join(_row_cells(profile.global_row)))
    return "\n".join(lines) + "\n"


def save_profile_csv(path: Path, profile: EntanglementProfile, config_hash: str = "") -> None:
    atomic_write_text(path, profile_csv_text(profile, config_hash))


def _row_json(row: ProfileRow) -> dict:
    return {
        "alpha": row.alpha,
        "x_center": None if not np.isfinite(row.x_center) else row.x_center,
        "m_alpha": row.m_alpha,
        "sigma": row.sigma,
        "S": row.entropy,
        "S_L": row.linear_entropy,
        "K_eff": row.schmidt_number,
        "spectrum": None if row.spectrum is None else [float(v) for v in row.spectrum],
        "walker_mean": None if row.walker_stats is None else list(row.walker_stats.mean),
        "walker_variance": None if row.walker_stats is None else row.walker_stats.variance,
    }


def profile_json_obj(profile: EntanglementProfile, config_hash: str = "") -> dict:
    return {
        "config_hash": config_hash,
        "electron": profile.electron,
        "edges": [float(e) for e in profile.partition.edges],
        "outside_count": profile.outside_count,
        "strips": [_row_json(r) for r in profile.rows],
        "global": _row_json(profile.global_row),
    }


def save_profile_json(path: Path, profile: EntanglementProfile, config_hash: str = "") -> None:
    atomic_write_text(path, json.dumps(profile_json_obj(profile, config_hash), indent=1) + "\n")


def save_json(path: Path, obj: dict) -> None:
    atomic_write_text(path, json.dumps(obj, indent=1) + "\n")


def load_json(path: Path) -> dict:
    return json.loads(Path(path).read_text())

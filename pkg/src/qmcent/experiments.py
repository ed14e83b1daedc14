"""Experiment pipelines: exact reference, guide-wave run, and comparison.

A pipeline takes an ExperimentConfig and produces an entanglement profile
plus the artifacts needed to reproduce it. ``compare`` merges an exact and
a TDQMC run over identical strips into a single report: per-strip deltas,
sigma-vs-entropy correlations, spectrum tables and (for parallel spins)
the exchange-corrected entropy rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import exact as exact_mod
from . import partition as partition_mod
from . import stats, tdqmc
from .config import ExperimentConfig
from .errors import ComparisonError
from .exact import ConditionalWaveSet, GlobalSchmidt, Symmetry, TwoBodyState
from .model import SpinConfig, SystemModel
from .partition import EntanglementProfile, ProfileRow, StripPartition
from .tdqmc import TdqmcState

# strips thinner than this are excluded from correlation/extreme statistics;
# a singleton strip forces S = 0 regardless of physics
MIN_STRIP_POPULATION = 10


@dataclass
class ExactRunResult:
    state: TwoBodyState
    walkers: np.ndarray
    waves: ConditionalWaveSet
    profile: EntanglementProfile
    global_schmidt: GlobalSchmidt
    strips: StripPartition
    config_hash: str


@dataclass
class TdqmcRunResult:
    state: TdqmcState
    profile: EntanglementProfile
    fermion_profile: EntanglementProfile | None
    strips: StripPartition
    config_hash: str


def symmetry_for(model: SystemModel) -> Symmetry:
    return Symmetry.SYMMETRIC if model.spin is SpinConfig.OPPOSITE else Symmetry.ANTISYMMETRIC


def run_exact_pipeline(cfg: ExperimentConfig, strips: StripPartition | None = None,
                       state: TwoBodyState | None = None) -> ExactRunResult:
    """Solve (or reuse) the exact two-body state and profile it.

    Samples the configured number of walkers from |psi|^2, slices the
    conditional waves at their partner coordinates, and assembles the strip
    profile plus the global Schmidt data.
    """
    model = cfg.build_model()
    if state is None:
        state = exact_mod.imaginary_time_ground_state(
            model,
            symmetry_for(model),
            dtau=cfg.exact.dtau,
            max_steps=cfg.exact.max_steps,
            energy_tol=cfg.exact.energy_tol,
        )
    walkers = exact_mod.sample_walkers(
        state,
        cfg.tdqmc.m_walkers,
        seed=cfg.run.seed,
        burn_in=cfg.exact.burn_in,
        thin=cfg.exact.thin,
    )
    electron = cfg.strips.electron
    if strips is None:
        strips = cfg.resolve_strips(walker_x=walkers[:, electron - 1])
    waves = exact_mod.conditional_waves(state, walkers, electron=electron)
    assignment = partition_mod.assign_walkers(strips, walkers)
    profile = partition_mod.local_profile(
        assignment, waves.values, model.grid.dx, walkers, electron
    )
    return ExactRunResult(
        state=state,
        walkers=walkers,
        waves=waves,
        profile=profile,
        global_schmidt=exact_mod.global_schmidt(state),
        strips=strips,
        config_hash=cfg.hash(),
    )


def fermion_profile(assignment, waves: tdqmc.GuideWaveEnsemble,
                    positions: np.ndarray) -> EntanglementProfile:
    """Identical-particle profile from per-walker orbital pairs.

    Each strip's one-body state is the mixture of its walkers' two-orbital
    determinant states (all 2*M_alpha orbitals with equal weight); its
    entropy is bounded below by ln 2, so the exchange-corrected row stays
    non-negative.
    """
    p = assignment.partition
    dx = waves.grid.dx
    rows = []
    for alpha in range(p.n_strips):
        sel = assignment.indices_in(alpha)
        center = float(p.centers[alpha])
        if len(sel) == 0:
            rows.append(ProfileRow(alpha=alpha, x_center=center, m_alpha=0))
            continue
        stacked = np.concatenate([waves.electron(1)[sel], waves.electron(2)[sel]])
        rows.append(partition_mod.strip_row(alpha, center, stacked, dx,
                                            positions[sel], m_alpha=len(sel)))
    stacked_all = np.concatenate([waves.electron(1), waves.electron(2)])
    global_row = partition_mod.strip_row(partition_mod.GLOBAL_ALPHA, float("nan"),
                                         stacked_all, dx, positions,
                                         m_alpha=positions.shape[0])
    return EntanglementProfile(
        partition=p,
        electron=0,  # union of both electrons' orbitals
        rows=tuple(rows),
        global_row=global_row,
        outside_count=assignment.outside_count,
    )


def run_tdqmc_pipeline(cfg: ExperimentConfig, strips: StripPartition | None = None,
                       state: TdqmcState | None = None) -> TdqmcRunResult:
    """Run (or reuse) a converged guide-wave ensemble and profile it.

    Parallel-spin runs also produce the identical-particle profile built
    from per-walker determinant pairs.
    """
    model = cfg.build_model()
    if state is None:
        state = tdqmc.run_to_convergence(
            model,
            m=cfg.tdqmc.m_walkers,
            dtau=cfg.tdqmc.dtau,
            kernel_width=cfg.kernel_width_value(),
            seed=cfg.run.seed,
            max_steps=cfg.tdqmc.max_steps,
            energy_tol=cfg.tdqmc.energy_tol,
            moves_per_step=cfg.tdqmc.moves_per_step,
            proposal_width=cfg.tdqmc.proposal_width,
            min_steps=cfg.tdqmc.min_steps,
        )
    electron = cfg.strips.electron
    positions = state.walkers.positions
    if strips is None:
        strips = cfg.resolve_strips(walker_x=positions[:, electron - 1])
    assignment = partition_mod.assign_walkers(strips, positions)
    profile = partition_mod.local_profile(
        assignment, state.waves.electron(electron), model.grid.dx, positions, electron
    )
    fermion = None
    if model.spin is SpinConfig.PARALLEL:
        fermion = fermion_profile(assignment, state.waves, positions)
    return TdqmcRunResult(
        state=state,
        profile=profile,
        fermion_profile=fermion,
        strips=strips,
        config_hash=cfg.hash(),
    )


def profile_correlation(profile: EntanglementProfile,
                        min_walkers: int = MIN_STRIP_POPULATION) -> tuple[float | None, int]:
    """Pearson correlation between the sigma and S strip profiles."""
    rows = profile.defined_rows(min_walkers)
    if len(rows) < 3:
        return None, len(rows)
    sigma = np.array([r.sigma for r in rows])
    entropy = np.array([r.entropy for r in rows])
    if np.std(sigma) == 0.0 or np.std(entropy) == 0.0:
        return None, len(rows)
    return float(np.corrcoef(sigma, entropy)[0, 1]), len(rows)


def _row_summary(row: ProfileRow) -> dict:
    return {
        "alpha": row.alpha,
        "x_center": None if not np.isfinite(row.x_center) else row.x_center,
        "m_alpha": row.m_alpha,
        "sigma": row.sigma,
        "S": row.entropy,
        "S_L": row.linear_entropy,
        "K_eff": row.schmidt_number,
    }


def _spectrum_list(lambdas, count: int = 8) -> list[float]:
    lam = list(float(v) for v in lambdas[:count])
    return lam + [0.0] * (count - len(lam))


def compare(exact_result: ExactRunResult | None,
            tdqmc_result: TdqmcRunResult | None) -> dict:
    """Merge pipeline outputs into the comparison report (JSON-ready).

    Requires matching strip layouts when both sides are present; a missing
    pipeline leaves its fields null rather than zero.
    """
    if exact_result is None and tdqmc_result is None:
        raise ComparisonError("compare needs at least one pipeline result")
    strips = None
    if exact_result is not None and tdqmc_result is not None:
        if not np.allclose(exact_result.strips.edges, tdqmc_result.strips.edges) \
                or exact_result.strips.axis != tdqmc_result.strips.axis:
            raise ComparisonError(
                "pipelines used different strip layouts; "
                f"exact {exact_result.strips.edges.tolist()} vs "
                f"tdqmc {tdqmc_result.strips.edges.tolist()}"
            )
    strips = (exact_result or tdqmc_result).strips

    report: dict = {
        "config_hash": (exact_result or tdqmc_result).config_hash,
        "strips": {
            "edges": [float(e) for e in strips.edges],
            "electron": strips.axis,
            "central_index": strips.central_index,
        },
        "global": {"exact_svd": None, "exact_conditional": None, "tdqmc_ensemble": None},
        "profiles": {"exact": None, "tdqmc": None},
        "correlation": {"exact": None, "tdqmc": None},
        "deltas": None,
        "spectra": {"global_exact": None, "central_exact": None, "central_tdqmc": None},
        "central_strip": None,
        "fermion": None,
    }

    central = strips.central_index
    exact_profile = exact_result.profile if exact_result else None
    tdqmc_profile = tdqmc_result.profile if tdqmc_result else None

    if exact_result is not None:
        gs = exact_result.global_schmidt
        report["global"]["exact_svd"] = {
            "S": gs.entropy,
            "S_L": gs.linear_entropy,
            "energy": exact_result.state.energy,
            "source": "exact.global_schmidt",
        }
        grow = exact_profile.global_row
        report["global"]["exact_conditional"] = dict(
            _row_summary(grow), source="exact.conditional_waves+local_profile"
        )
        corr, used = profile_correlation(exact_profile)
        report["correlation"]["exact"] = {"sigma_vs_S": corr, "strips_used": used}
        report["profiles"]["exact"] = [_row_summary(r) for r in exact_profile.rows]
        report["spectra"]["global_exact"] = _spectrum_list(gs.spectrum.lambdas)
        if exact_profile.rows[central].defined:
            report["spectra"]["central_exact"] = _spectrum_list(
                exact_profile.rows[central].spectrum
            )

    if tdqmc_result is not None:
        grow = tdqmc_profile.global_row
        report["global"]["tdqmc_ensemble"] = dict(
            _row_summary(grow),
            energy=tdqmc_result.state.energy_estimate,
            kernel_width=tdqmc_result.state.kernel_width,
            source="tdqmc.run_to_convergence+local_profile",
        )
        corr, used = profile_correlation(tdqmc_profile)
        report["correlation"]["tdqmc"] = {"sigma_vs_S": corr, "strips_used": used}
        report["profiles"]["tdqmc"] = [_row_summary(r) for r in tdqmc_profile.rows]
        if tdqmc_profile.rows[central].defined:
            report["spectra"]["central_tdqmc"] = _spectrum_list(
                tdqmc_profile.rows[central].spectrum
            )

    if exact_result is not None and tdqmc_result is not None:
        deltas = []
        for er, tr in zip(exact_profile.rows, tdqmc_profile.rows):
            if er.defined and tr.defined:
                deltas.append({
                    "alpha": er.alpha,
                    "x_center": er.x_center,
                    "d_sigma": tr.sigma - er.sigma,
                    "d_S": tr.entropy - er.entropy,
                })
        report["deltas"] = deltas

    central_info: dict = {"global_exact_S": None, "exact_S": None, "tdqmc_S": None}
    if exact_result is not None:
        central_info["global_exact_S"] = exact_result.global_schmidt.entropy
        if exact_profile.rows[central].defined:
            central_info["exact_S"] = exact_profile.rows[central].entropy
    if tdqmc_result is not None and tdqmc_profile.rows[central].defined:
        central_info["tdqmc_S"] = tdqmc_profile.rows[central].entropy
    report["central_strip"] = central_info

    fermion = _fermion_section(exact_result, tdqmc_result)
    if fermion is not None:
        report["fermion"] = fermion
    return report


def _fermion_section(exact_result, tdqmc_result) -> dict | None:
    """Exchange-corrected (minus ln 2) entropy rows for parallel-spin runs."""
    section = {}
    if exact_result is not None and exact_result.state.symmetry is Symmetry.ANTISYMMETRIC:
        section["exact_corrected"] = [
            {"alpha": r.alpha, "x_center": r.x_center, "m_alpha": r.m_alpha,
             "S_minus_ln2": None if r.entropy is None else r.entropy - stats.LN2}
            for r in exact_result.profile.rows
        ]
    if tdqmc_result is not None and tdqmc_result.fermion_profile is not None:
        section["tdqmc_identical"] = [
            {"alpha": r.alpha, "x_center": r.x_center, "m_alpha": r.m_alpha,
             "S": r.entropy,
             "S_minus_ln2": None if r.entropy is None else r.entropy - stats.LN2}
            for r in tdqmc_result.fermion_profile.rows
        ]
        grow = tdqmc_result.fermion_profile.global_row
        section["tdqmc_identical_global"] = {
            "S": grow.entropy,
            "S_minus_ln2": None if grow.entropy is None else grow.entropy - stats.LN2,
        }
    return section or None


def long_format_rows(report: dict) -> list[tuple[str, float, float, str]]:
    """Plot-ready rows (quantity, strip_center, value, source)."""
    rows: list[tuple[str, float, float, str]] = []
    for source in ("exact", "tdqmc"):
        profile = report["profiles"][source]
        if profile is None:
            continue
        for strip in profile:
            if strip["m_alpha"] == 0:
                continue
            for quantity in ("sigma", "S", "S_L", "K_eff"):
                rows.append((quantity, strip["x_center"], strip[quantity], source))
    fermion = report.get("fermion") or {}
    for key, source in (("exact_corrected", "exact"), ("tdqmc_identical", "tdqmc")):
        for strip in fermion.get(key, []):
            if strip["m_alpha"] == 0:
                continue
            rows.append(("S_minus_ln2", strip["x_center"], strip["S_minus_ln2"], source))
    return rows

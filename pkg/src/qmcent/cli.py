"""Command-line interface.

Subcommands
    exact     solve the two-body reference, sample walkers, write profile
    tdqmc     run the guide-wave ensemble to convergence, write profile
    profile   recompute a strip profile from a cached run directory
    compare   merge an exact and a tdqmc run into a comparison report
    selftest  run the fast invariant suite

Exit codes: 0 success, 1 validation/config error, 2 numerical failure.
Outputs are written atomically; a failed run leaves no partial files.
Expensive solves are cached in the output directory and reused when the
config hash matches (``--force`` recomputes).
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import experiments, partition as partition_mod, plots, storage
from .config import _SECTIONS, ExperimentConfig, load_config
from .errors import ComparisonError, ConfigError, NumericalError, ValidationError
from .experiments import ExactRunResult, TdqmcRunResult
from .model import SpinConfig

log = logging.getLogger("qmcent")

CONFIG_DOC = {
    "system.preset": "system preset: helium | molecule | custom",
    "system.spin": "electron spins: opposite | parallel",
    "system.a_en": "electron-nucleus softening length (a.u.)",
    "system.a_ee": "electron-electron softening length (a.u.)",
    "system.ee_coupling": "electron-electron charge product; 0 disables the interaction",
    "system.bond_length": "internuclear distance for the molecule preset (a.u.)",
    "system.omega": "harmonic confinement strength (a.u.); custom systems",
    "system.nuclei": "custom nuclei as pos:charge;pos:charge (a.u.)",
    "system.grid_min": "left box edge override (a.u.)",
    "system.grid_max": "right box edge override (a.u.)",
    "system.grid_n": "grid point count override",
    "exact.dtau": "imaginary-time step of the 2D solver (a.u.)",
    "exact.max_steps": "step budget of the 2D solver",
    "exact.energy_tol": "per-step energy drift threshold (a.u.)",
    "exact.burn_in": "Metropolis burn-in steps before collecting walkers",
    "exact.thin": "Metropolis steps between collected walkers",
    "tdqmc.m_walkers": "ensemble size M (walkers and guide-wave sets)",
    "tdqmc.dtau": "imaginary-time step of the guide-wave engine (a.u.)",
    "tdqmc.max_steps": "step budget of the guide-wave engine",
    "tdqmc.min_steps": "steps before the convergence rule arms",
    "tdqmc.energy_tol": "per-step smoothed-energy drift threshold (a.u.)",
    "tdqmc.kernel_width": "Monte Carlo convolution kernel width (a.u.) or 'auto'",
    "tdqmc.moves_per_step": "Metropolis moves per walker per step",
    "tdqmc.proposal_width": "Metropolis proposal width (a.u.)",
    "strips.n_strips": "number of uniform strips",
    "strips.lo": "left edge of the strip range (a.u.) or 'auto'",
    "strips.hi": "right edge of the strip range (a.u.) or 'auto'",
    "strips.electron": "electron axis used for partitioning (1 or 2)",
    "run.seed": "master seed; all substreams derive from it",
    "run.pipelines": "pipelines to run: both | exact | tdqmc",
}


def _config_epilog() -> str:
    lines = ["config keys (flat 'key = value' under [section] headers):"]
    for name, cls in _SECTIONS.items():
        for f in fields(cls):
            doc = CONFIG_DOC.get(f"{name}.{f.name}", "")
            default = f.default
            lines.append(f"  [{name}] {f.name:<15} {doc} (default: {default})")
    lines.append("environment overrides: QMCENT_<SECTION>_<KEY>, e.g. QMCENT_RUN_SEED=7")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmcent",
        description=__doc__,
        epilog=_config_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_config=True):
        p.add_argument("--config", type=Path, required=needs_config,
                       help="experiment config file")
        p.add_argument("--out", type=Path, required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override [run] seed")
        p.add_argument("--threads", type=int, default=None,
                       help="cap BLAS/FFT worker threads")
        p.add_argument("--verbose", action="store_true", help="chatty progress logging")
        p.add_argument("--force", action="store_true",
                       help="ignore cached artifacts in the output directory")

    add_common(sub.add_parser("exact", help="exact two-body pipeline"))
    add_common(sub.add_parser("tdqmc", help="guide-wave ensemble pipeline"))

    p_profile = sub.add_parser("profile", help="recompute strips from a cached run")
    add_common(p_profile)
    p_profile.add_argument("--run", type=Path, required=True,
                           help="directory of a prior exact or tdqmc run")

    p_cmp = sub.add_parser("compare", help="merge exact and tdqmc runs into a report")
    add_common(p_cmp)
    p_cmp.add_argument("--exact-run", type=Path, required=True,
                       help="directory of a prior exact run")
    p_cmp.add_argument("--tdqmc-run", type=Path, required=True,
                       help="directory of a prior tdqmc run")

    p_self = sub.add_parser("selftest", help="run the fast invariant suite")
    p_self.add_argument("--verbose", action="store_true")
    return parser


@contextlib.contextmanager
def _thread_cap(threads: int | None):
    if threads is None:
        yield
        return
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        log.warning("threadpoolctl not installed; --threads ignored")
        yield
        return
    with threadpool_limits(limits=threads):
        yield


def _load_cfg(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        from dataclasses import replace
        cfg = replace(cfg, run=replace(cfg.run, seed=args.seed))
    return cfg


def _write_common_report(out: Path, cfg: ExperimentConfig, report: dict,
                         exact_result=None, tdqmc_result=None) -> None:
    chash = cfg.hash()
    storage.save_json(out / "report.json", report)
    rows = experiments.long_format_rows(report)
    lines = [f"# config_hash={chash}", "quantity,strip_center,value,source"]
    lines += [f"{q},{storage.fmt(x)},{storage.fmt(v)},{s}" for q, x, v, s in rows]
    storage.atomic_write_text(out / "long.csv", "\n".join(lines) + "\n")
    spectra_lines = [f"# config_hash={chash}", "m,global_exact,central_exact,central_tdqmc"]
    spectra = report["spectra"]
    for m in range(8):
        cells = [str(m + 1)]
        for key in ("global_exact", "central_exact", "central_tdqmc"):
            lam = spectra.get(key)
            cells.append("" if lam is None else storage.fmt(lam[m]))
        spectra_lines.append(",".join(cells))
    storage.atomic_write_text(out / "spectra.csv", "\n".join(spectra_lines) + "\n")
    title = f"{cfg.system.preset}, {cfg.system.spin} spins"
    plots.save_profile_figure(out / "profile.png", report, title=title)
    plots.save_spectra_figure(out / "spectra.png", report, title=title)
    if report.get("fermion"):
        plots.save_fermion_figure(out / "fermion.png", report, title=title)
    exact_walkers = exact_result.walkers if exact_result else None
    tdqmc_walkers = tdqmc_result.state.walkers.positions if tdqmc_result else None
    if exact_walkers is not None or tdqmc_walkers is not None:
        plots.save_walker_figure(out / "walkers.png", exact_walkers, tdqmc_walkers,
                                 title=title)


def _run_exact(cfg: ExperimentConfig, out: Path, force: bool) -> ExactRunResult:
    chash = cfg.hash()
    state = None
    state_path = out / "state.field2d"
    if not force and state_path.exists():
        cached, cached_hash = storage.load_state(state_path)
        if cached_hash == chash:
            log.info("reusing cached state %s", state_path)
            state = cached
    result = experiments.run_exact_pipeline(cfg, state=state)
    storage.save_state(state_path, result.state, chash)
    storage.save_walkers(out / "walkers.csv", result.walkers, chash)
    storage.save_profile_csv(out / "profile.csv", result.profile, chash)
    storage.save_profile_json(out / "profile.json", result.profile, chash)
    storage.atomic_write_text(out / "config.resolved.cfg", cfg.canonical_text())
    report = experiments.compare(result, None)
    _write_common_report(out, cfg, report, exact_result=result)
    return result


def _run_tdqmc(cfg: ExperimentConfig, out: Path, force: bool) -> TdqmcRunResult:
    chash = cfg.hash()
    state = None
    waves_path = out / "waves.ensemble"
    walkers_path = out / "walkers.csv"
    if not force and waves_path.exists() and walkers_path.exists():
        waves, meta = storage.load_ensemble(waves_path)
        if meta.get("config_hash") == chash:
            log.info("reusing cached ensemble %s", waves_path)
            from .tdqmc import TdqmcState, WalkerEnsemble
            state = TdqmcState(
                walkers=WalkerEnsemble(positions=storage.load_walkers(walkers_path)),
                waves=waves,
                tau=float(meta.get("tau", "nan")),
                energy_estimate=float(meta.get("energy", "nan")),
                kernel_width=float(meta.get("kernel_width", "1.0")),
            )
    result = experiments.run_tdqmc_pipeline(cfg, state=state)
    storage.save_ensemble(
        waves_path, result.state.waves, chash,
        extra={
            "tau": storage.fmt(result.state.tau),
            "energy": storage.fmt(result.state.energy_estimate),
            "kernel_width": storage.fmt(result.state.kernel_width),
        },
    )
    storage.save_walkers(walkers_path, result.state.walkers.positions, chash)
    storage.save_profile_csv(out / "profile.csv", result.profile, chash)
    storage.save_profile_json(out / "profile.json", result.profile, chash)
    if result.fermion_profile is not None:
        storage.save_profile_csv(out / "profile_fermion.csv", result.fermion_profile, chash)
        storage.save_profile_json(out / "profile_fermion.json", result.fermion_profile, chash)
    storage.atomic_write_text(out / "config.resolved.cfg", cfg.canonical_text())
    report = experiments.compare(None, result)
    _write_common_report(out, cfg, report, tdqmc_result=result)
    return result


def _require(path: Path) -> Path:
    if not path.exists():
        raise ConfigError(f"required input file is missing: {path}")
    return path


def _load_exact_result(cfg: ExperimentConfig, run_dir: Path) -> ExactRunResult:
    state, _ = storage.load_state(_require(run_dir / "state.field2d"))
    walkers = storage.load_walkers(_require(run_dir / "walkers.csv"))
    result = experiments.run_exact_pipeline(cfg, state=state)
    return result


def _load_tdqmc_result(cfg: ExperimentConfig, run_dir: Path) -> TdqmcRunResult:
    from .tdqmc import TdqmcState, WalkerEnsemble
    waves, meta = storage.load_ensemble(_require(run_dir / "waves.ensemble"))
    walkers = storage.load_walkers(_require(run_dir / "walkers.csv"))
    state = TdqmcState(
        walkers=WalkerEnsemble(positions=walkers),
        waves=waves,
        tau=float(meta.get("tau", "nan")),
        energy_estimate=float(meta.get("energy", "nan")),
        kernel_width=float(meta.get("kernel_width", "1.0")),
    )
    return experiments.run_tdqmc_pipeline(cfg, state=state)


def _cmd_compare(cfg: ExperimentConfig, args) -> int:
    exact_result = _load_exact_result(cfg, args.exact_run)
    tdqmc_result = _load_tdqmc_result(cfg, args.tdqmc_run)
    report = experiments.compare(exact_result, tdqmc_result)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    _write_common_report(out, cfg, report, exact_result, tdqmc_result)
    log.info("comparison written to %s", out)
    return 0


def _cmd_profile(cfg: ExperimentConfig, args) -> int:
    run_dir = args.run
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    if (run_dir / "state.field2d").exists():
        result = _load_exact_result(cfg, run_dir)
        report = experiments.compare(result, None)
        profile = result.profile
    elif (run_dir / "waves.ensemble").exists():
        result = _load_tdqmc_result(cfg, run_dir)
        report = experiments.compare(None, result)
        profile = result.profile
    else:
        raise ConfigError(
            f"required input file is missing: {run_dir}/state.field2d "
            f"or {run_dir}/waves.ensemble"
        )
    chash = cfg.hash()
    storage.save_profile_csv(out / "profile.csv", profile, chash)
    storage.save_profile_json(out / "profile.json", profile, chash)
    _write_common_report(out, cfg, report)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.command == "selftest":
        from .selftest import run_selftest
        return 0 if run_selftest() else 1

    try:
        cfg = _load_cfg(args)
        with _thread_cap(args.threads):
            if args.command == "exact":
                args.out.mkdir(parents=True, exist_ok=True)
                result = _run_exact(cfg, args.out, args.force)
                print(f"exact: E = {result.state.energy:.8f}, "
                      f"S_global = {result.global_schmidt.entropy:.6f}, "
                      f"outputs in {args.out}")
            elif args.command == "tdqmc":
                args.out.mkdir(parents=True, exist_ok=True)
                result = _run_tdqmc(cfg, args.out, args.force)
                print(f"tdqmc: E = {result.state.energy_estimate:.8f}, "
                      f"sigma_global = {result.profile.global_row.sigma:.6f}, "
                      f"outputs in {args.out}")
            elif args.command == "profile":
                _cmd_profile(cfg, args)
                print(f"profile written to {args.out}")
            elif args.command == "compare":
                _cmd_compare(cfg, args)
                print(f"comparison written to {args.out}")
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure in {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Figure rendering for run and comparison reports.

Figures are written next to the CSV/JSON outputs (PNG, Agg backend, no
display needed). Exact results are drawn in red, guide-wave results in
blue, matching the usual convention for this kind of comparison.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

EXACT_COLOR = "#c23b22"
TDQMC_COLOR = "#1f77b4"
GLOBAL_COLOR = "#2ca02c"

_SOURCE_STYLE = {
    "exact": dict(color=EXACT_COLOR, marker="o", label="exact conditional"),
    "tdqmc": dict(color=TDQMC_COLOR, marker="s", label="guide waves"),
}


def _profile_arrays(strips):
    rows = [s for s in strips if s["m_alpha"] > 0]
    x = np.array([s["x_center"] for s in rows])
    return rows, x


def save_profile_figure(path: Path, report: dict, title: str = "") -> None:
    """Two panels: functional std and entropy per strip, both sources."""
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.6), sharex=True)
    for source in ("exact", "tdqmc"):
        profile = report["profiles"].get(source)
        if profile is None:
            continue
        rows, x = _profile_arrays(profile)
        style = _SOURCE_STYLE[source]
        axes[0].plot(x, [s["sigma"] for s in rows], ms=4, **style)
        axes[1].plot(x, [s["S"] for s in rows], ms=4, **style)
    global_exact = report["global"].get("exact_svd")
    if global_exact is not None:
        axes[1].axhline(global_exact["S"], color=GLOBAL_COLOR, ls="--", lw=1,
                        label="global exact S")
    axes[0].set_ylabel(r"$\sigma_\alpha$")
    axes[1].set_ylabel(r"$S_\alpha$  (nats)")
    for ax in axes:
        ax.set_xlabel(r"strip center  $x_\alpha$ (a.u.)")
        ax.grid(alpha=0.3)
    axes[1].legend(fontsize=8)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Software": None})
    plt.close(fig)


def save_spectra_figure(path: Path, report: dict, title: str = "") -> None:
    """Leading Schmidt weights: global exact vs central-strip estimates."""
    fig, ax = plt.subplots(figsize=(4.8, 3.6))
    series = (
        ("global_exact", dict(color=GLOBAL_COLOR, marker="o", ls="-", label="global exact")),
        ("central_exact", dict(color=EXACT_COLOR, marker="v", ls="", label="central strip, exact")),
        ("central_tdqmc", dict(color=TDQMC_COLOR, marker="^", ls="", label="central strip, guide waves")),
    )
    for key, style in series:
        lam = report["spectra"].get(key)
        if lam is None:
            continue
        lam = np.array(lam)
        keep = lam > 1e-12
        ax.semilogy(np.arange(1, len(lam) + 1)[keep], lam[keep], ms=5, **style)
    ax.set_xlabel("mode index $m$")
    ax.set_ylabel(r"$\lambda_m$")
    ax.grid(alpha=0.3, which="both")
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Software": None})
    plt.close(fig)


def save_walker_figure(path: Path, exact_walkers=None, tdqmc_walkers=None,
                       title: str = "") -> None:
    """Configuration-space scatter of the sampled walker clouds."""
    fig, ax = plt.subplots(figsize=(4.4, 4.2))
    if exact_walkers is not None:
        ax.plot(exact_walkers[:, 0], exact_walkers[:, 1], ".", ms=2,
                color=EXACT_COLOR, alpha=0.5, label="exact")
    if tdqmc_walkers is not None:
        ax.plot(tdqmc_walkers[:, 0], tdqmc_walkers[:, 1], ".", ms=2,
                color=TDQMC_COLOR, alpha=0.5, label="guide waves")
    ax.set_xlabel("$x_1$ (a.u.)")
    ax.set_ylabel("$x_2$ (a.u.)")
    ax.set_aspect("equal")
    ax.legend(fontsize=8, markerscale=3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Software": None})
    plt.close(fig)


def save_fermion_figure(path: Path, report: dict, title: str = "") -> None:
    """Exchange-corrected local entropies for parallel-spin runs."""
    fermion = report.get("fermion")
    if not fermion:
        return
    fig, ax = plt.subplots(figsize=(4.8, 3.6))
    for key, style in (
        ("exact_corrected", dict(color=EXACT_COLOR, marker="o", ls="--",
                                 label=r"exact $S_\alpha - \ln 2$")),
        ("tdqmc_identical", dict(color=GLOBAL_COLOR, marker="s", ls="-",
                                 label=r"guide waves, identical, $-\ln 2$")),
    ):
        rows = [r for r in fermion.get(key, []) if r["m_alpha"] > 0]
        if not rows:
            continue
        x = [r["x_center"] for r in rows]
        ax.plot(x, [r["S_minus_ln2"] for r in rows], ms=4, **style)
    tdqmc_profile = report["profiles"].get("tdqmc")
    if tdqmc_profile is not None:
        rows, x = _profile_arrays(tdqmc_profile)
        ax.plot(x, [r["S"] for r in rows], color=TDQMC_COLOR, marker="s", ls=":",
                ms=4, label="guide waves, distinguishable")
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel(r"strip center  $x_\alpha$ (a.u.)")
    ax.set_ylabel(r"$S_\alpha$ (nats)")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Software": None})
    plt.close(fig)

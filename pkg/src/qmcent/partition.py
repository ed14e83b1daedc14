"""Strip partitioning of walker ensembles and spatially resolved profiles.

A strip partition divides one electron's coordinate axis into contiguous
intervals. Each strip collects the walkers whose coordinate falls inside it;
the guide waves of those walkers (with full spatial support) then yield the
strip's Gram matrix and every local entanglement measure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, PartitionError
from . import stats
from .stats import ClassicalStats

OUTSIDE = -1

SPECTRUM_COLUMNS = 8  # lambdas written per CSV row; JSON carries them all


@dataclass(frozen=True)
class StripPartition:
    """Ascending strip edges along one electron's axis (1-based electron index)."""

    axis: int
    edges: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "edges", np.asarray(self.edges, dtype=float))
        if self.axis not in (1, 2):
            raise ParameterError(f"axis must be electron 1 or 2, got {self.axis}")
        if self.edges.ndim != 1 or len(self.edges) < 2:
            raise ParameterError("a partition needs at least two edges")
        if not np.all(np.diff(self.edges) > 0):
            raise ParameterError("strip edges must be strictly ascending")

    @property
    def n_strips(self) -> int:
        return len(self.edges) - 1

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def central_index(self) -> int:
        """Strip whose center is closest to x = 0."""
        return int(np.argmin(np.abs(self.centers)))


@dataclass(frozen=True)
class DomainAssignment:
    """Strip index per walker; OUTSIDE marks walkers beyond the edges."""

    partition: StripPartition
    membership: np.ndarray

    def indices_in(self, alpha: int) -> np.ndarray:
        return np.flatnonzero(self.membership == alpha)

    @property
    def counts(self) -> np.ndarray:
        counts = np.zeros(self.partition.n_strips, dtype=int)
        inside = self.membership[self.membership != OUTSIDE]
        np.add.at(counts, inside, 1)
        return counts

    @property
    def outside_count(self) -> int:
        return int(np.sum(self.membership == OUTSIDE))


def make_strips(x_lo: float, x_hi: float, n_strips: int, axis: int = 1) -> StripPartition:
    """Uniform partition of [x_lo, x_hi] into n_strips strips."""
    if not x_hi > x_lo:
        raise ParameterError(f"empty strip range [{x_lo}, {x_hi}]")
    if n_strips < 1:
        raise ParameterError(f"need at least one strip, got {n_strips}")
    return StripPartition(axis=axis, edges=np.linspace(x_lo, x_hi, n_strips + 1))


def assign_walkers(p: StripPartition, positions: np.ndarray) -> DomainAssignment:
    """Assign walkers to strips by the partition axis coordinate alone.

    Intervals are left-closed/right-open; the last strip also includes its
    right edge. Walkers beyond the outer edges are marked OUTSIDE.
    """
    pts = np.atleast_2d(np.asarray(positions, dtype=float))
    coord = pts[:, p.axis - 1]
    idx = np.searchsorted(p.edges, coord, side="right") - 1
    idx[coord == p.edges[-1]] = p.n_strips - 1  # right-closed last strip
    idx[(coord < p.edges[0]) | (coord > p.edges[-1])] = OUTSIDE
    return DomainAssignment(partition=p, membership=idx)


@dataclass(frozen=True)
class ProfileRow:
    """Entanglement measures of one strip; measure fields are None when empty."""

    alpha: int
    x_center: float
    m_alpha: int
    sigma: float | None = None
    entropy: float | None = None
    linear_entropy: float | None = None
    schmidt_number: float | None = None
    spectrum: np.ndarray | None = None
    walker_stats: ClassicalStats | None = None

    @property
    def defined(self) -> bool:
        return self.m_alpha > 0

    def top_lambdas(self, count: int = SPECTRUM_COLUMNS) -> list:
        if self.spectrum is None:
            return [None] * count
        lam = list(self.spectrum[:count])
        return lam + [0.0] * (count - len(lam))


GLOBAL_ALPHA = -1


@dataclass(frozen=True)
class EntanglementProfile:
    """Per-strip rows plus the global (all-walker) row."""

    partition: StripPartition
    electron: int
    rows: tuple[ProfileRow, ...]
    global_row: ProfileRow
    outside_count: int

    def row(self, alpha: int) -> ProfileRow:
        return self.rows[alpha]

    @property
    def central_row(self) -> ProfileRow:
        return self.rows[self.partition.central_index]

    def defined_rows(self, min_walkers: int = 1) -> list[ProfileRow]:
        return [r for r in self.rows if r.m_alpha >= min_walkers]


def strip_row(alpha: int, center: float, waves: np.ndarray, dx: float,
              positions: np.ndarray, m_alpha: int | None = None) -> ProfileRow:
    """Full set of measures for one strip's wave selection.

    ``m_alpha`` defaults to the wave count; the identical-fermion profile
    passes the walker count while handing in both orbitals per walker.
    """
    g = stats.gram_matrix(waves, dx)
    spec = stats.ensemble_spectrum(waves, dx)
    return ProfileRow(
        alpha=alpha,
        x_center=center,
        m_alpha=waves.shape[0] if m_alpha is None else m_alpha,
        sigma=stats.functional_std(g),
        entropy=stats.von_neumann_entropy(spec),
        linear_entropy=stats.linear_entropy(spec),
        schmidt_number=stats.effective_schmidt_number(spec),
        spectrum=spec.lambdas,
        walker_stats=stats.walker_statistics(positions),
    )


def local_profile(assignment: DomainAssignment, waves: np.ndarray, dx: float,
                  positions: np.ndarray, electron: int) -> EntanglementProfile:
    """Entanglement profile of one electron's wave ensemble over the strips.

    ``waves`` holds that electron's guide or conditional waves, one row per
    walker, aligned with ``positions`` (M x 2 walker coordinates). Strip
    membership restricts only the walker selection; the selected waves keep
    their full spatial support.
    """
    waves = np.atleast_2d(np.asarray(waves))
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    if waves.shape[0] != positions.shape[0]:
        raise PartitionError(
            f"{waves.shape[0]} waves for {positions.shape[0]} walkers"
        )
    if len(assignment.membership) != waves.shape[0]:
        raise PartitionError("assignment covers a different number of walkers")
    p = assignment.partition
    rows = []
    for alpha in range(p.n_strips):
        sel = assignment.indices_in(alpha)
        center = float(p.centers[alpha])
        if len(sel) == 0:
            rows.append(ProfileRow(alpha=alpha, x_center=center, m_alpha=0))
            continue
        rows.append(strip_row(alpha, center, waves[sel], dx, positions[sel]))
    global_row = strip_row(GLOBAL_ALPHA, float("nan"), waves, dx, positions)
    return EntanglementProfile(
        partition=p,
        electron=electron,
        rows=tuple(rows),
        global_row=global_row,
        outside_count=assignment.outside_count,
    )

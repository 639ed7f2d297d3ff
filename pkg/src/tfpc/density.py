"""k-nearest-neighbor density scores and top-density / local-max row selection.

The per-row score is k / D^q where D is the distance to the row's k-th
nearest other row and q the number of plotted dimensions; the hypersphere
volume constant is dropped because only comparisons matter. Rows can be
ranked globally (most or least dense) or filtered to rows whose density is
maximal within their own neighborhood.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .table import CONTINUOUS, Table


class DuplicateRowsError(ValueError):
    """A k-th neighbor at distance zero collapses the kNN volume to zero."""


@dataclass(frozen=True)
class DensityConfig:
    """Neighbor count, plot dimension, optional per-group estimation.

    `q` defaults to the number of plotted columns. When `group_column` is
    set, neighbors are sought within the same group only.
    """

    k: int
    q: int | None = None
    group_column: str | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.q is not None and self.q < 1:
            raise ValueError(f"q must be >= 1, got {self.q}")


@dataclass(frozen=True)
class DensityScore:
    """Density estimate for one row; rank 1 is the densest row."""

    row_index: int
    density: float
    knn_radius: float
    rank: int


def default_k(n: int) -> int:
    """Fallback neighbor count when the caller gives none: n/100, capped at 50."""
    return max(1, min(50, round(n / 100)))


def _plot_matrix(table: Table, config: DensityConfig) -> tuple[np.ndarray, list[str]]:
    names = [
        c.name
        for c in table.columns
        if c.kind == CONTINUOUS and c.name != config.group_column
    ]
    if not names:
        raise ValueError("no continuous columns to estimate density on")
    x = np.column_stack([table.column(n).values for n in names])
    if np.isnan(x).any():
        raise ValueError(
            "missing values present; take complete rows (or impute) before density estimation"
        )
    return x, names


def _group_indices(table: Table, config: DensityConfig) -> list[np.ndarray]:
    if config.group_column is None:
        return [np.arange(table.n)]
    col = table.column(config.group_column)
    if not col.is_discrete:
        raise ValueError(f"group column {config.group_column!r} must be categorical")
    if bool(col.na_mask.any()):
        raise ValueError(f"group column {config.group_column!r} has missing values")
    return [np.flatnonzero(col.values == lev) for lev in range(len(col.levels))]


def _knn_radii(x: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """(radius, neighbor indices) for each row, self excluded."""
    n = x.shape[0]
    if k >= n:
        raise ValueError(f"k={k} must be smaller than the row count {n}")
    tree = cKDTree(x)
    dist, idx = tree.query(x, k=k + 1)
    # The query includes each row itself at distance 0; drop it from the
    # neighbor lists (it is not always reported first when ties occur).
    rows = np.arange(n)[:, None]
    keep = idx != rows
    extra = keep.sum(axis=1) - k
    if extra.any():
        # a row tied with an exact duplicate: drop the farthest entry instead
        for i in np.flatnonzero(extra):
            keep[i, np.flatnonzero(keep[i])[-1]] = False
    neighbors = idx[keep].reshape(n, k)
    radii = dist[keep].reshape(n, k)[:, -1]
    return radii, neighbors


def knn_density(table: Table, config: DensityConfig) -> list[DensityScore]:
    """Score every row by k / D^q with D the k-th nearest-neighbor distance.

    Expects centered/scaled continuous columns with no missing cells.
    Raises DuplicateRowsError when any D is zero (exact duplicate rows);
    jittering the data is the usual fix.
    """
    x, names = _plot_matrix(table, config)
    q = config.q if config.q is not None else len(names)
    radii = np.empty(table.n, dtype=np.float64)
    for idx in _group_indices(table, config):
        if idx.size == 0:
            continue
        radii[idx] = _knn_radii(x[idx], config.k)[0]
    if np.any(radii == 0.0):
        bad = int(np.flatnonzero(radii == 0.0)[0])
        raise DuplicateRowsError(
            f"row {bad} has its k-th nearest neighbor at distance 0 (duplicate rows); "
            "jitter the data to give neighborhoods positive volume"
        )
    density = config.k / radii**q
    # Rank by radius, not density, to dodge float overflow; same ordering.
    order = np.lexsort((np.arange(table.n), radii))
    rank = np.empty(table.n, dtype=np.int64)
    rank[order] = np.arange(1, table.n + 1)
    return [
        DensityScore(i, float(density[i]), float(radii[i]), int(rank[i]))
        for i in range(table.n)
    ]


def top_density_rows(scores: list[DensityScore], lines: int) -> list[int]:
    """Row indices of the `lines` densest rows (negative: least dense).

    Output is ordered by rank. |lines| larger than the score count clamps
    with a warning.
    """
    if lines == 0:
        raise ValueError("the number of lines must be nonzero")
    count = abs(lines)
    if count > len(scores):
        warnings.warn(f"requested {count} rows from {len(scores)} scores; clamping")
        count = len(scores)
    by_rank = sorted(scores, key=lambda s: s.rank)
    chosen = by_rank[:count] if lines > 0 else by_rank[len(by_rank) - count:]
    return [s.row_index for s in chosen]


def locmax_rows(table: Table, scores: list[DensityScore], config: DensityConfig) -> list[int]:
    """Rows whose density is at least that of each of their k nearest neighbors.

    These are local modes; they surface small clusters that global top-F
    ranking would drown out. `scores` must come from knn_density with the
    same config. Output is ordered by rank.
    """
    x, _ = _plot_matrix(table, config)
    density = np.empty(table.n, dtype=np.float64)
    rank = np.empty(table.n, dtype=np.int64)
    for s in scores:
        density[s.row_index] = s.density
        rank[s.row_index] = s.rank
    out = []
    for idx in _group_indices(table, config):
        if idx.size == 0:
            continue
        _, neighbors = _knn_radii(x[idx], config.k)
        local = idx[neighbors]  # (group_n, k) global row indices
        keep = density[idx] >= density[local].max(axis=1)
        out.extend(int(i) for i in idx[keep])
    return sorted(out, key=lambda i: rank[i])

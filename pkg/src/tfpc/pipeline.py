"""Shared wiring from a loaded table to a selection: used by the CLI and server."""

from __future__ import annotations

import warnings

import numpy as np

from .counting import (
    CountConfig,
    FrequencyTable,
    count_tuples,
    estimate_q,
    frequency_table_from_probabilities,
)
from .density import DensityConfig, DensityScore, default_k, knn_density, locmax_rows, top_density_rows
from .discretize import DiscretizeSpec, center_scale, discretize
from .missing import mar_update, mom_estimate
from .table import CONTINUOUS, Table, complete_rows

COUNT_METHODS = ("drop", "naexp", "mom", "mar")


def ensure_discrete(table: Table, spec: DiscretizeSpec) -> Table:
    """Discretize any continuous columns; all-discrete tables pass through."""
    if any(c.kind == CONTINUOUS for c in table.columns):
        return discretize(table, spec)
    return table


def compute_frequencies(
    table: Table,
    method: str = "drop",
    naexp: float = 1.0,
    accentuate: tuple[str, str, float] | None = None,
    threads: int = 1,
) -> FrequencyTable:
    """Frequency table for an all-discrete table under the chosen NA handling."""
    if method not in COUNT_METHODS:
        raise ValueError(f"unknown na method {method!r}; choose from {COUNT_METHODS}")
    if method in ("mom", "mar") and accentuate is not None:
        raise ValueError("accentuate applies to counting methods only (drop/naexp)")
    if method == "drop":
        config = CountConfig("drop", accentuate=accentuate)
        return count_tuples(table, config, threads=threads)
    if method == "naexp":
        config = CountConfig("partial_credit", naexp=naexp, accentuate=accentuate)
        return count_tuples(table, config, threads=threads)
    if method == "mar":
        return mar_update(table)
    q = estimate_q(table)
    if not 0.0 < q < 1.0:
        raise ValueError(
            f"method-of-moments estimation needs missing values (q={q:g}); use drop instead"
        )
    probabilities = mom_estimate(table, q)
    return frequency_table_from_probabilities(table, probabilities, scale=table.n)


def density_selection(
    table: Table,
    k: int | None = None,
    lines: int = 50,
    locmax: bool = False,
    group: str | None = None,
) -> tuple[list[DensityScore], Table, list[int]]:
    """Drop incomplete rows, center/scale, score by kNN density, pick rows.

    Returns the chosen scores (per group when `group` is set, so each facet
    gets its own top-F), the scaled complete-row table the plot should use,
    and the original dataset index of each of that table's rows (for labels).
    """
    sub, kept = complete_rows(table)
    if sub.n < table.n:
        warnings.warn(
            f"dropped {table.n - sub.n} rows with missing cells before density estimation"
        )
    scaled, _ = center_scale(sub)
    config = DensityConfig(k if k is not None else default_k(sub.n), group_column=group)
    scores = knn_density(scaled, config)
    if locmax:
        rows = locmax_rows(scaled, scores, config)
    elif group is None:
        rows = top_density_rows(scores, lines)
    else:
        col = scaled.column(group)
        rows = []
        for level in range(len(col.levels)):
            members = np.flatnonzero(col.values == level)
            if members.size:
                rows.extend(top_density_rows([scores[i] for i in members], lines))
    return [scores[i] for i in rows], scaled, kept

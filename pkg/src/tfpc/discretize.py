"""Convert continuous columns to discrete levels, scale, jitter, subsample.

Discretization uses equal-count quantile bins: with L requested levels, bin b
covers the empirical quantile interval ((b-1)/L, b/L]. Ties share a bin, and
bins emptied by heavy ties are merged away. Each bin is labeled with the
median of its member values, rendered to 4 significant digits.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .table import CONTINUOUS, DISCRETIZED, NA_CODE, Column, Table


@dataclass(frozen=True)
class DiscretizeSpec:
    """Requested level count, with optional per-column overrides."""

    nlevels: int = 10
    overrides: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.nlevels < 2:
            raise ValueError(f"nlevels must be >= 2, got {self.nlevels}")
        for name, k in self.overrides.items():
            if k < 2:
                raise ValueError(f"nlevels override for {name!r} must be >= 2, got {k}")

    def levels_for(self, name: str) -> int:
        return int(self.overrides.get(name, self.nlevels))


@dataclass(frozen=True)
class ScaleParams:
    """Per-column centering/scaling statistics, over the dataset as a whole."""

    mean: Mapping[str, float]
    std: Mapping[str, float]


def _sig_labels(medians: list[float]) -> list[str]:
    """Render strictly increasing medians at 4 significant digits.

    Rendering can collide for near-equal medians; colliding groups get
    extra digits until all labels are distinct.
    """
    digits = 4
    labels = [format(m, f".{digits}g") for m in medians]
    while len(set(labels)) != len(labels) and digits < 17:
        digits += 1
        seen: dict[str, int] = {}
        for lab in labels:
            seen[lab] = seen.get(lab, 0) + 1
        labels = [
            format(m, f".{digits}g") if seen[lab] > 1 else lab
            for m, lab in zip(medians, labels)
        ]
    return labels


def _discretize_column(col: Column, nlevels: int) -> Column:
    vals = col.values
    na = np.isnan(vals)
    obs = vals[~na]
    if obs.size == 0:
        return Column(col.name, DISCRETIZED, np.full(len(vals), NA_CODE, dtype=np.int64), ())
    distinct = np.unique(obs)
    if distinct.size == 1:
        warnings.warn(
            f"column {col.name!r} has a single distinct value; one level produced"
        )
        codes = np.where(na, NA_CODE, 0).astype(np.int64)
        return Column(col.name, DISCRETIZED, codes, (_sig_labels([float(distinct[0])])[0],))

    m = obs.size
    ordered = np.sort(obs)
    # Empirical-CDF rank of each value; bin = ceil(rank * nlevels / m), so ties
    # always land in one bin and bin sizes stay within one of each other.
    ranks = np.searchsorted(ordered, vals[~na], side="right")
    bins = (ranks * nlevels + m - 1) // m
    used = np.unique(bins)
    remap = {int(b): i for i, b in enumerate(used)}

    codes = np.full(len(vals), NA_CODE, dtype=np.int64)
    codes[~na] = np.array([remap[int(b)] for b in bins], dtype=np.int64)
    medians = [float(np.median(vals[codes == i])) for i in range(len(used))]
    labels = _sig_labels(medians)
    return Column(col.name, DISCRETIZED, codes, tuple(labels))


def discretize(table: Table, spec: DiscretizeSpec) -> Table:
    """Replace every continuous column with an equal-count quantile binning.

    Missing cells pass through as missing. Discrete columns are untouched.
    """
    for name in spec.overrides:
        if not table.column(name).kind == CONTINUOUS:
            raise ValueError(f"nlevels override targets non-continuous column {name!r}")
    cols = tuple(
        _discretize_column(c, spec.levels_for(c.name)) if c.kind == CONTINUOUS else c
        for c in table.columns
    )
    return Table(cols)


def center_scale(table: Table) -> tuple[Table, ScaleParams]:
    """Center and scale continuous columns to mean 0, sample stddev 1.

    Statistics come from the whole dataset (missing cells excluded); a
    zero-variance column maps to all zeros.
    """
    means: dict[str, float] = {}
    stds: dict[str, float] = {}
    cols = []
    for c in table.columns:
        if c.kind != CONTINUOUS:
            cols.append(c)
            continue
        obs = c.values[~np.isnan(c.values)]
        mu = float(obs.mean()) if obs.size else 0.0
        sd = float(obs.std(ddof=1)) if obs.size > 1 else 0.0
        means[c.name] = mu
        stds[c.name] = sd
        if sd > 0:
            scaled = (c.values - mu) / sd
        else:
            scaled = np.where(np.isnan(c.values), np.nan, 0.0)
        cols.append(Column(c.name, CONTINUOUS, scaled))
    return Table(tuple(cols)), ScaleParams(means, stds)


def jitter(table: Table, amount_factor: float = 1.0, seed: int = 0) -> Table:
    """Add uniform noise to continuous columns to break exact ties.

    Noise is drawn on [-d, d] with d = amount_factor * (smallest gap between
    distinct values) / 2, so at the default factor the rank order of distinct
    values survives. Deterministic for a fixed seed.
    """
    if amount_factor < 0:
        raise ValueError("amount_factor must be >= 0")
    rng = np.random.default_rng(seed)
    cols = []
    for c in table.columns:
        if c.kind != CONTINUOUS:
            cols.append(c)
            continue
        na = np.isnan(c.values)
        distinct = np.unique(c.values[~na])
        if distinct.size < 2:
            warnings.warn(f"column {c.name!r} has a single distinct value; not jittered")
            cols.append(c)
            continue
        d = amount_factor * float(np.diff(distinct).min()) / 2.0
        if d == 0.0:
            cols.append(c)
            continue
        noise = rng.uniform(-d, d, size=len(c.values))
        cols.append(Column(c.name, CONTINUOUS, np.where(na, np.nan, c.values + noise)))
    return Table(tuple(cols))


def subsample(table: Table, size: int, seed: int = 0) -> Table:
    """Uniform random sample of `size` rows without replacement."""
    if not 1 <= size <= table.n:
        raise ValueError(f"subsample size {size} out of range 1..{table.n}")
    rng = np.random.default_rng(seed)
    return table.take(rng.choice(table.n, size=size, replace=False))

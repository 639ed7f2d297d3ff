"""Weighted tuple-frequency counting over all-discrete tables.

A pattern is one combination of level codes across the table's columns.
Complete rows contribute weight 1 to their pattern. Rows with missing cells
either contribute nothing (drop mode) or spread fractional credit over every
completion consistent with their observed cells (partial-credit mode): a row
with c of p cells missing gives each of its L completions
(1/L) * ((p - c)/p)^naexp. A chosen level can be accentuated, multiplying the
weight of every pattern containing it so rare groups survive top-F selection.

Counting is shard-parallel with a deterministic merge; weights from a
parallel run match a serial run to float accumulation error.
"""

from __future__ import annotations

import io
import itertools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .table import NA_CODE, Table

Pattern = tuple[int, ...]

#: Provenance markers for FrequencyTable weights.
RAW_COUNTS = "counts"
PARTIAL_CREDIT = "partial_credit"
ESTIMATED = "estimated"
IMPORTED = "imported"


class CompletionCapError(ValueError):
    """A missing-cell row implies more completions than the configured cap."""


@dataclass(frozen=True)
class CountConfig:
    """How rows with missing cells count, and what (if anything) to accentuate."""

    na_mode: str = "drop"  # "drop" | "partial_credit"
    naexp: float = 1.0
    accentuate: tuple[str, str, float] | None = None  # (column, level, multiplier)
    completion_cap: int = 10_000

    def __post_init__(self) -> None:
        if self.na_mode not in ("drop", "partial_credit"):
            raise ValueError(f"unknown na_mode {self.na_mode!r}")
        if not (math.isfinite(self.naexp) and self.naexp >= 0):
            raise ValueError(f"naexp must be finite and >= 0, got {self.naexp}")
        if self.accentuate is not None and self.accentuate[2] < 1:
            raise ValueError(f"accentuate multiplier must be >= 1, got {self.accentuate[2]}")
        if self.completion_cap < 1:
            raise ValueError("completion_cap must be positive")


@dataclass(frozen=True)
class FrequencyTable:
    """Distinct patterns and their nonnegative weights, plus level metadata.

    `codes` holds one pattern per row as level codes into `levels`;
    `weights` aligns with it. With raw counts every weight is a nonnegative
    integer and the total equals the number of complete rows counted.
    """

    columns: tuple[str, ...]
    levels: tuple[tuple[str, ...], ...]
    codes: np.ndarray
    weights: np.ndarray
    provenance: str = RAW_COUNTS

    def __post_init__(self) -> None:
        codes = np.ascontiguousarray(np.asarray(self.codes))
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if codes.ndim != 2 or codes.shape[1] != len(self.columns):
            raise ValueError("codes must be (n_patterns, n_columns)")
        if codes.shape[0] != weights.shape[0]:
            raise ValueError("codes and weights disagree on pattern count")
        if len(self.levels) != len(self.columns):
            raise ValueError("one level list per column required")
        if weights.size and weights.min() < 0:
            raise ValueError("weights must be nonnegative")
        codes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "levels", tuple(tuple(l) for l in self.levels))
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "weights", weights)

    @property
    def n_patterns(self) -> int:
        return int(self.codes.shape[0])

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def pattern(self, i: int) -> Pattern:
        return tuple(int(c) for c in self.codes[i])

    def labels_of(self, pattern: Pattern) -> tuple[str, ...]:
        return tuple(self.levels[j][c] for j, c in enumerate(pattern))

    def as_dict(self) -> dict[Pattern, float]:
        return {self.pattern(i): float(self.weights[i]) for i in range(self.n_patterns)}

    def label_weights(self) -> dict[tuple[str, ...], float]:
        return {
            self.labels_of(self.pattern(i)): float(self.weights[i])
            for i in range(self.n_patterns)
        }

    def weight_of(self, pattern: Pattern) -> float:
        match = (self.codes == np.asarray(pattern)).all(axis=1)
        hit = np.flatnonzero(match)
        return float(self.weights[hit[0]]) if hit.size else 0.0


def _as_void(codes: np.ndarray) -> np.ndarray:
    codes = np.ascontiguousarray(codes)
    return codes.view(np.dtype((np.void, codes.dtype.itemsize * codes.shape[1]))).ravel()


def _aggregate(codes: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sum weights over identical rows of `codes`; rows come out in byte order."""
    if codes.shape[0] == 0:
        return codes, weights.astype(np.float64)
    uniq, inverse = np.unique(_as_void(codes), return_inverse=True)
    summed = np.bincount(inverse.ravel(), weights=weights, minlength=len(uniq))
    out = uniq.view(codes.dtype).reshape(len(uniq), codes.shape[1])
    return out, summed


def _codes_matrix(table: Table) -> np.ndarray:
    bad = [c.name for c in table.columns if not c.is_discrete]
    if bad:
        raise ValueError(
            f"continuous columns present ({', '.join(bad)}); discretize them before counting"
        )
    dtype = np.result_type(*(c.values.dtype for c in table.columns))
    out = np.empty((table.n, table.p), dtype=dtype)
    for j, c in enumerate(table.columns):
        out[:, j] = c.values
    return out


def _credit_shard(
    codes: np.ndarray,
    level_counts: Sequence[int],
    naexp: float,
    cap: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Completions and credits for every incomplete row of a shard."""
    p = codes.shape[1]
    chunks: list[np.ndarray] = []
    credits: list[np.ndarray] = []
    for row in codes:
        missing = np.flatnonzero(row == NA_CODE)
        c = len(missing)
        total = 1
        for j in missing:
            total *= level_counts[j]
        if total > cap:
            raise CompletionCapError(
                f"row implies {total} completions, over the cap of {cap}"
            )
        if total == 0:
            continue  # a missing cell in a column with no declared levels
        credit = (1.0 / total) * ((p - c) / p) ** naexp
        block = np.tile(row, (total, 1))
        for col, combo in zip(
            missing, zip(*itertools.product(*(range(level_counts[j]) for j in missing)))
        ):
            block[:, col] = combo
        chunks.append(block)
        credits.append(np.full(total, credit))
    if not chunks:
        return np.empty((0, p), dtype=codes.dtype), np.empty(0)
    return np.concatenate(chunks), np.concatenate(credits)


def _count_shard(
    codes: np.ndarray, level_counts: Sequence[int], config: CountConfig
) -> tuple[np.ndarray, np.ndarray]:
    complete = (codes != NA_CODE).all(axis=1)
    uniq, counts = _aggregate(codes[complete], np.ones(int(complete.sum())))
    if config.na_mode == "partial_credit" and not complete.all():
        extra, credits = _credit_shard(
            codes[~complete], level_counts, config.naexp, config.completion_cap
        )
        return _aggregate(
            np.concatenate([uniq, extra]), np.concatenate([counts, credits])
        )
    return uniq, counts


def count_tuples(
    table: Table, config: CountConfig = CountConfig(), threads: int = 1
) -> FrequencyTable:
    """Count the weighted frequency of every pattern in an all-discrete table.

    With threads > 1 the rows are split into shards counted concurrently and
    merged in shard order, so results are reproducible.
    """
    codes = _codes_matrix(table)
    level_counts = [len(c.levels) for c in table.columns]
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if threads == 1 or table.n < 2 * threads:
        uniq, weights = _count_shard(codes, level_counts, config)
    else:
        bounds = np.linspace(0, table.n, threads + 1, dtype=int)
        shards = [codes[bounds[i]:bounds[i + 1]] for i in range(threads)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(
                pool.map(lambda s: _count_shard(s, level_counts, config), shards)
            )
        uniq, weights = _aggregate(
            np.concatenate([u for u, _ in parts]),
            np.concatenate([w for _, w in parts]),
        )
    if config.accentuate is not None:
        col, level, mult = config.accentuate
        j = table.index_of(col)
        levels = table.columns[j].levels
        if level not in levels:
            raise ValueError(f"accentuate level {level!r} not among levels of {col!r}")
        weights = np.where(uniq[:, j] == levels.index(level), weights * mult, weights)
    provenance = PARTIAL_CREDIT if config.na_mode == "partial_credit" else RAW_COUNTS
    return FrequencyTable(
        table.names,
        tuple(c.levels for c in table.columns),
        uniq,
        weights,
        provenance,
    )


def estimate_q(table: Table) -> float:
    """Proportion of missing cells among all n*p cells."""
    return float(table.na_mask().mean())


def _ordered_indices(ft: FrequencyTable, ascending: bool) -> np.ndarray:
    """Pattern indices sorted by weight, ties by the pattern's level labels."""
    label_keys = [
        np.asarray(ft.levels[j], dtype=object)[ft.codes[:, j]]
        for j in range(len(ft.columns))
    ]
    w = ft.weights if ascending else -ft.weights
    return np.lexsort(tuple(reversed(label_keys)) + (w,))


def top_patterns(ft: FrequencyTable, lines: int) -> list[tuple[Pattern, float]]:
    """The `lines` heaviest patterns (negative: lightest), weight > 0 only.

    Positive `lines` returns the largest weights in descending order;
    negative returns the |lines| smallest in ascending order (outlier
    hunting). Ties break lexicographically on level labels.
    """
    if lines == 0:
        raise ValueError("the number of lines must be nonzero")
    present = np.flatnonzero(ft.weights > 0)
    count = abs(lines)
    if count > present.size:
        warnings.warn(
            f"requested {count} patterns but only {present.size} have positive weight; clamping"
        )
        count = present.size
    if count == 0:
        return []
    w = ft.weights[present]
    # Trim to the candidates at or past the cutoff weight before label
    # tie-breaking, so huge tables never materialize full label arrays.
    if lines > 0:
        cutoff = np.partition(w, w.size - count)[w.size - count]
        cand = present[w >= cutoff]
    else:
        cutoff = np.partition(w, count - 1)[count - 1]
        cand = present[w <= cutoff]
    sub = FrequencyTable(
        ft.columns, ft.levels, ft.codes[cand], ft.weights[cand], ft.provenance
    )
    order = _ordered_indices(sub, ascending=lines < 0)[:count]
    return [(sub.pattern(i), float(sub.weights[i])) for i in order]


def _text_out(sink: IO) -> tuple[IO, bool]:
    if hasattr(sink, "encoding") or isinstance(sink, io.StringIO):
        return sink, False
    return io.TextIOWrapper(sink, encoding="utf-8", newline=""), True


def export_frequencies(ft: FrequencyTable, sink: IO) -> None:
    """Write every pattern and its weight as tab-separated text.

    One header line (column names then "frequency"), then one line per
    pattern: level labels, then the weight with 6 decimal places. Lines are
    sorted by descending weight, ties by labels.
    """
    out, wrap = _text_out(sink)
    out.write("\t".join(ft.columns + ("frequency",)) + "\n")
    for i in _ordered_indices(ft, ascending=False):
        labels = ft.labels_of(ft.pattern(int(i)))
        out.write("\t".join(labels) + f"\t{ft.weights[i]:.6f}\n")
    if wrap:
        out.detach()


def import_frequencies(source: bytes | str | IO) -> FrequencyTable:
    """Read the export_frequencies format back into a FrequencyTable."""
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    lines = [l for l in text.split("\n") if l != ""]
    if not lines:
        raise ValueError("empty frequency file")
    header = lines[0].split("\t")
    if header[-1] != "frequency":
        raise ValueError("missing frequency header")
    columns = tuple(header[:-1])
    levels: list[list[str]] = [[] for _ in columns]
    rows = []
    weights = []
    for line in lines[1:]:
        fields = line.split("\t")
        if len(fields) != len(columns) + 1:
            raise ValueError(f"bad frequency line: {line!r}")
        pattern = []
        for j, lab in enumerate(fields[:-1]):
            if lab not in levels[j]:
                levels[j].append(lab)
            pattern.append(levels[j].index(lab))
        rows.append(pattern)
        weights.append(float(fields[-1]))
    codes = np.asarray(rows, dtype=np.int64).reshape(len(rows), len(columns))
    return FrequencyTable(
        columns, tuple(tuple(l) for l in levels), codes, np.asarray(weights), IMPORTED
    )


def frequency_table_from_probabilities(
    table: Table, probabilities: dict[Pattern, float], scale: float
) -> FrequencyTable:
    """Package estimator output as a FrequencyTable over `table`'s columns."""
    patterns = sorted(probabilities)
    codes = np.asarray(patterns, dtype=np.int64).reshape(len(patterns), table.p)
    weights = np.asarray([probabilities[t] * scale for t in patterns])
    return FrequencyTable(
        table.names, tuple(c.levels for c in table.columns), codes, weights, ESTIMATED
    )

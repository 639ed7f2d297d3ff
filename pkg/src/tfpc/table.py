"""Columnar tables with typed columns and explicit missing-value tracking.

A Table is a fixed-width collection of named columns. Continuous columns hold
float64 values with NaN marking missing cells; categorical and discretized
columns hold integer codes into an ordered list of level labels, with -1
marking missing cells. Tables are immutable: every operation returns a new
Table and shares the underlying (read-only) arrays where possible.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"
DISCRETIZED = "discretized"

#: Sentinel code for a missing cell in a categorical/discretized column.
NA_CODE = -1

#: Tokens read as missing values unless the caller overrides them.
DEFAULT_NA_TOKENS = ("NA", "")


class CsvParseError(ValueError):
    """Malformed CSV input: ragged rows or an empty stream."""


def _code_dtype(n_levels: int) -> np.dtype:
    """Smallest signed integer dtype that can hold codes 0..n_levels-1 and NA_CODE."""
    for dt in (np.int8, np.int16, np.int32, np.int64):
        if n_levels - 1 <= np.iinfo(dt).max:
            return np.dtype(dt)
    raise ValueError(f"cannot represent {n_levels} levels")


def number_label(x: float) -> str:
    """Canonical label for a numeric level: '2' for 2.0, '1.5' for 1.5."""
    if math.isfinite(x) and x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


@dataclass(frozen=True)
class Column:
    """One named column: continuous values, or integer codes into `levels`.

    `levels` is the authoritative, ordered set of labels for a discrete
    column; its order is the axis display order. Codes index into it, and a
    declared level need not occur in the data.
    """

    name: str
    kind: str
    values: np.ndarray
    levels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in (CONTINUOUS, CATEGORICAL, DISCRETIZED):
            raise ValueError(f"unknown column kind {self.kind!r}")
        levels = tuple(self.levels)
        if self.kind == CONTINUOUS:
            if levels:
                raise ValueError(f"continuous column {self.name!r} cannot carry levels")
            vals = np.asarray(self.values, dtype=np.float64).reshape(-1)
        else:
            if len(set(levels)) != len(levels):
                raise ValueError(f"duplicate level labels in column {self.name!r}")
            vals = np.asarray(self.values).reshape(-1)
            if not np.issubdtype(vals.dtype, np.integer):
                raise ValueError(f"discrete column {self.name!r} must hold integer level codes")
            vals = vals.astype(_code_dtype(max(len(levels), 1)), copy=False)
            if vals.size and (vals.min() < NA_CODE or vals.max() >= len(levels)):
                raise ValueError(f"level code out of range in column {self.name!r}")
        vals = np.ascontiguousarray(vals)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "levels", levels)

    @property
    def n_rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def is_discrete(self) -> bool:
        return self.kind in (CATEGORICAL, DISCRETIZED)

    @property
    def na_mask(self) -> np.ndarray:
        if self.kind == CONTINUOUS:
            return np.isnan(self.values)
        return self.values == NA_CODE

    def label_of(self, row: int) -> str | None:
        """Level label at `row`, or None for a missing cell."""
        code = int(self.values[row])
        return None if code == NA_CODE else self.levels[code]


@dataclass(frozen=True)
class Table:
    """An immutable columnar dataset; all columns share one row count."""

    columns: tuple[Column, ...]

    def __post_init__(self) -> None:
        cols = tuple(self.columns)
        if not cols:
            raise ValueError("a table needs at least one column")
        names = [c.name for c in cols]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names")
        n = cols[0].n_rows
        for c in cols:
            if c.n_rows != n:
                raise ValueError(
                    f"column {c.name!r} has {c.n_rows} rows, expected {n}"
                )
        object.__setattr__(self, "columns", cols)

    @property
    def n(self) -> int:
        return self.columns[0].n_rows

    @property
    def p(self) -> int:
        return len(self.columns)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise ValueError(f"unknown column {name!r}")

    def index_of(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise ValueError(f"unknown column {name!r}")

    def na_mask(self) -> np.ndarray:
        """(n, p) boolean matrix, True where a cell is missing."""
        return np.column_stack([c.na_mask for c in self.columns])

    def complete_mask(self) -> np.ndarray:
        """(n,) boolean vector, True for rows with no missing cell."""
        return ~self.na_mask().any(axis=1)

    def take(self, rows: Sequence[int] | np.ndarray) -> Table:
        """Row subset/permutation; level sets are preserved as declared."""
        idx = np.asarray(rows, dtype=np.intp)
        return Table(tuple(
            Column(c.name, c.kind, c.values[idx], c.levels) for c in self.columns
        ))

    def with_column(self, index: int, column: Column) -> Table:
        cols = list(self.columns)
        cols[index] = column
        return Table(tuple(cols))


def _parse_number(token: str) -> float | None:
    """Finite float value of `token`, or None when it does not read as one."""
    try:
        v = float(token)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def _as_text_lines(source: bytes | str | IO) -> Iterable[str]:
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, str):
        return io.StringIO(source)
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return io.StringIO(data)


def load_csv(
    source: bytes | str | IO,
    header: bool = True,
    na_tokens: Sequence[str] = DEFAULT_NA_TOKENS,
) -> Table:
    """Read delimited text into a Table, auto-typing each column.

    A column is continuous iff every non-missing token parses as a finite
    number; otherwise it is categorical with levels in first-appearance
    order. Tokens in `na_tokens` become missing cells.
    """
    reader = csv.reader(_as_text_lines(source))
    rows: list[list[str]] = []
    names: list[str] | None = None
    width: int | None = None
    for lineno, fields in enumerate(reader, start=1):
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise CsvParseError(
                f"line {lineno}: expected {width} fields, got {len(fields)}"
            )
        if names is None and header:
            names = [f.strip() for f in fields]
            continue
        rows.append(fields)
    if width is None or not rows:
        raise CsvParseError("empty input")
    if names is None:
        names = [f"V{j + 1}" for j in range(width)]

    na_set = set(na_tokens)
    columns = []
    for j, name in enumerate(names):
        tokens = [row[j].strip() for row in rows]
        observed = [t for t in tokens if t not in na_set]
        parsed = [_parse_number(t) for t in observed]
        if observed and all(v is not None for v in parsed):
            vals = np.array(
                [np.nan if t in na_set else float(t) for t in tokens], dtype=np.float64
            )
            columns.append(Column(name, CONTINUOUS, vals))
        else:
            levels: list[str] = []
            index: dict[str, int] = {}
            codes = np.empty(len(tokens), dtype=np.int64)
            for i, t in enumerate(tokens):
                if t in na_set:
                    codes[i] = NA_CODE
                else:
                    if t not in index:
                        index[t] = len(levels)
                        levels.append(t)
                    codes[i] = index[t]
            columns.append(Column(name, CATEGORICAL, codes, tuple(levels)))
    return Table(tuple(columns))


def emit_csv(table: Table, sink: IO) -> None:
    """Write `table` as CSV; missing cells become the token "NA".

    Loading the output back (with default NA tokens) reproduces values,
    missing-cell mask, and level order for tables that came from load_csv.
    """
    out = sink
    if hasattr(sink, "mode") and "b" in getattr(sink, "mode", ""):
        out = io.TextIOWrapper(sink, encoding="utf-8", newline="")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(table.names)
    for i in range(table.n):
        row = []
        for c in table.columns:
            if c.kind == CONTINUOUS:
                v = float(c.values[i])
                row.append("NA" if math.isnan(v) else repr(v))
            else:
                label = c.label_of(i)
                row.append("NA" if label is None else label)
        writer.writerow(row)
    if out is not sink:
        out.detach()


def make_factor(
    table: Table,
    column_names: Sequence[str],
    levels: Mapping[str, Sequence[str]] | None = None,
) -> Table:
    """Turn named continuous columns categorical.

    Levels default to the distinct observed values in ascending numeric
    order. An entry in `levels` overrides that with an explicit, ordered
    label list, which may declare labels beyond the observed values (so a
    level can exist without occurring in the data). Already-discrete
    columns pass through unchanged.
    """
    result = table
    for name in column_names:
        idx = result.index_of(name)
        col = result.columns[idx]
        if col.is_discrete:
            continue
        vals = col.values
        obs = vals[~np.isnan(vals)]
        labels = [number_label(v) for v in np.unique(obs)]
        if levels is not None and name in levels:
            declared = [str(l) for l in levels[name]]
            missing = [l for l in labels if l not in declared]
            if missing:
                raise ValueError(
                    f"explicit levels for {name!r} do not cover observed values {missing}"
                )
            labels = declared
        index = {l: k for k, l in enumerate(labels)}
        codes = np.full(len(vals), NA_CODE, dtype=np.int64)
        for i, v in enumerate(vals):
            if not math.isnan(v):
                codes[i] = index[number_label(v)]
        result = result.with_column(idx, Column(name, CATEGORICAL, codes, tuple(labels)))
    return result


def re_order(table: Table, column: str, new_level_order: Sequence[str]) -> Table:
    """Change a discrete column's level display order.

    `new_level_order` must be a permutation of the existing levels; cells
    keep their labels, only axis positions move.
    """
    idx = table.index_of(column)
    col = table.columns[idx]
    if not col.is_discrete:
        raise ValueError(f"column {column!r} is continuous and has no levels")
    new = [str(l) for l in new_level_order]
    missing = [l for l in col.levels if l not in new]
    extra = [l for l in new if l not in col.levels]
    if missing or extra or len(new) != len(col.levels):
        raise ValueError(
            f"not a permutation of levels for {column!r}: "
            f"missing {missing}, unexpected {extra}"
        )
    remap = np.empty(len(col.levels), dtype=np.int64)
    for old_code, label in enumerate(col.levels):
        remap[old_code] = new.index(label)
    codes = col.values.astype(np.int64, copy=True)
    obs = codes != NA_CODE
    codes[obs] = remap[codes[obs]]
    return table.with_column(idx, Column(column, col.kind, codes, tuple(new)))


def set_levels(table: Table, column: str, levels: Sequence[str]) -> Table:
    """Replace a discrete column's declared level set.

    `levels` must cover every observed label and may add labels that do not
    occur in the data (declared-but-empty levels).
    """
    idx = table.index_of(column)
    col = table.columns[idx]
    if not col.is_discrete:
        raise ValueError(f"column {column!r} is continuous and has no levels")
    new = [str(l) for l in levels]
    observed = {col.levels[c] for c in np.unique(col.values) if c != NA_CODE}
    uncovered = sorted(observed - set(new))
    if uncovered:
        raise ValueError(f"levels for {column!r} do not cover observed labels {uncovered}")
    index = {l: k for k, l in enumerate(new)}
    remap = np.array([index.get(l, NA_CODE) for l in col.levels], dtype=np.int64)
    codes = col.values.astype(np.int64, copy=True)
    obs = codes != NA_CODE
    codes[obs] = remap[codes[obs]]
    return table.with_column(idx, Column(column, col.kind, codes, tuple(new)))


def complete_rows(table: Table) -> tuple[Table, list[int]]:
    """Rows with no missing cell, plus their original indices.

    The subtable may be empty when every row has a missing cell.
    """
    keep = np.flatnonzero(table.complete_mask())
    return table.take(keep), [int(i) for i in keep]

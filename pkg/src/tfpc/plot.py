"""Renderer-agnostic plot model for parallel coordinates, plus SVG/JSON output.

A PlotModel fixes the axes (ordered, with tick labels at positions in [0,1]),
the polylines (one vertex per axis, in [0,1]), per-line weights feeding a
discrete color ramp, conjunctive brush conditions, and optional facet
sub-models that share the parent's axis scaling. Identical polylines are
drawn once at their combined weight.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from typing import IO, Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .counting import Pattern
from .density import DensityScore
from .table import CONTINUOUS, NA_CODE, Table

#: Ordered ramp, heaviest weight first.
PALETTE = (
    "#67001f",
    "#b2182b",
    "#d6604d",
    "#f4a582",
    "#fddbc7",
    "#d1e5f0",
    "#92c5de",
    "#4393c3",
    "#2166ac",
    "#053061",
)

BRUSH_COLOR = "#ff00ff"

_POS_TOL = 1e-9


@dataclass(frozen=True)
class AxisTick:
    label: str
    pos: float


@dataclass(frozen=True)
class Axis:
    name: str
    ticks: tuple[AxisTick, ...]

    def pos_of(self, label: str) -> float:
        for t in self.ticks:
            if t.label == label:
                return t.pos
        raise ValueError(f"axis {self.name!r} has no level {label!r}")


@dataclass(frozen=True)
class PlotLine:
    verts: tuple[float, ...]
    weight: float
    label: str | None = None
    highlighted: bool = False
    color: int = 0


@dataclass(frozen=True)
class BrushCondition:
    """One conjunct: a level set on a discrete axis, or an interval on a
    continuous one (in [0,1] axis coordinates)."""

    axis: str
    levels: tuple[str, ...] | None = None
    interval: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if (self.levels is None) == (self.interval is None):
            raise ValueError("exactly one of levels/interval must be given")
        if self.levels is not None:
            object.__setattr__(self, "levels", tuple(self.levels))
        if self.interval is not None:
            lo, hi = self.interval
            if hi < lo:
                raise ValueError(f"empty interval ({lo}, {hi})")
            object.__setattr__(self, "interval", (float(lo), float(hi)))


@dataclass(frozen=True)
class LegendEntry:
    weight_range: tuple[float, float]
    color: str


@dataclass(frozen=True)
class PlotModel:
    axes: tuple[Axis, ...]
    lines: tuple[PlotLine, ...]
    brush: tuple[BrushCondition, ...] = ()
    facets: tuple[tuple[str, "PlotModel"], ...] | None = None
    legend: tuple[LegendEntry, ...] = ()

    def axis_index(self, name: str) -> int:
        for i, a in enumerate(self.axes):
            if a.name == name:
                return i
        raise ValueError(f"unknown axis {name!r}")

    def all_lines(self) -> tuple[PlotLine, ...]:
        if self.facets is None:
            return self.lines
        return tuple(l for _, sub in self.facets for l in sub.lines)


def _level_positions(n_levels: int) -> list[float]:
    if n_levels <= 1:
        return [0.5]
    return [i / (n_levels - 1) for i in range(n_levels)]


def _assign_colors(weights: Sequence[float]) -> tuple[dict[float, int], tuple[LegendEntry, ...]]:
    """Rank distinct weights onto the palette and build the legend."""
    distinct = sorted(set(weights), reverse=True)
    if not distinct:
        return {}, ()
    colors = {
        w: min(r * len(PALETTE) // len(distinct), len(PALETTE) - 1)
        for r, w in enumerate(distinct)
    }
    legend = []
    for idx in sorted(set(colors.values())):
        bucket = [w for w in distinct if colors[w] == idx]
        legend.append(LegendEntry((min(bucket), max(bucket)), PALETTE[idx]))
    return colors, tuple(legend)


def _discrete_axes(table: Table, names: Sequence[str]) -> tuple[Axis, ...]:
    axes = []
    for name in names:
        col = table.column(name)
        pos = _level_positions(len(col.levels))
        axes.append(Axis(name, tuple(AxisTick(l, p) for l, p in zip(col.levels, pos))))
    return tuple(axes)


def _continuous_axes(table: Table, names: Sequence[str]) -> tuple[Axis, ...]:
    axes = []
    for name in names:
        col = table.column(name)
        obs = col.values[~np.isnan(col.values)]
        lo = float(obs.min()) if obs.size else 0.0
        hi = float(obs.max()) if obs.size else 1.0
        mid = (lo + hi) / 2
        axes.append(Axis(name, (
            AxisTick(format(lo, ".4g"), 0.0),
            AxisTick(format(mid, ".4g"), 0.5),
            AxisTick(format(hi, ".4g"), 1.0),
        )))
    return tuple(axes)


def _axis_names(
    table: Table, column_order: Sequence[str] | None, facet_column: str | None, discrete: bool
) -> list[str]:
    if discrete:
        default = [c.name for c in table.columns if c.name != facet_column]
    else:
        default = [
            c.name
            for c in table.columns
            if c.kind == CONTINUOUS and c.name != facet_column
        ]
    if column_order is None:
        return default
    for name in column_order:
        if name == facet_column:
            raise ValueError(f"facet column {name!r} cannot also be an axis")
        if name not in default:
            raise ValueError(f"unknown column {name!r} in column order")
    if len(set(column_order)) != len(column_order):
        raise ValueError("column order repeats a column")
    return list(column_order)


def _facet_levels(table: Table, facet_column: str) -> tuple[str, ...]:
    col = table.column(facet_column)
    if not col.is_discrete:
        raise ValueError(f"facet column {facet_column!r} must be categorical")
    return col.levels


def build_plot(
    selection: Sequence[tuple[Pattern, float]] | Sequence[DensityScore],
    table: Table,
    column_order: Sequence[str] | None = None,
    labels: bool = False,
    facet_column: str | None = None,
    row_labels: Mapping[int, str] | None = None,
) -> PlotModel:
    """Turn a frequency or density selection into a PlotModel.

    Pattern selections (from top_patterns or the estimators) need an
    all-discrete table; density selections plot the continuous columns.
    `labels` attaches dataset row indices (density selections only);
    `row_labels` overrides them, e.g. with pre-filtering indices.
    Identical polylines merge, summing their weights.
    """
    density_mode = bool(selection) and isinstance(selection[0], DensityScore)
    if not selection:
        density_mode = not all(c.is_discrete for c in table.columns)
    names = _axis_names(table, column_order, facet_column, discrete=not density_mode)
    if density_mode:
        axes = _continuous_axes(table, names)
        entries = _density_entries(selection, table, names, labels, facet_column, row_labels)
    else:
        axes = _discrete_axes(table, names)
        entries = _pattern_entries(selection, table, names, facet_column)

    merged: dict[tuple[str | None, tuple[float, ...]], list] = {}
    for facet, verts, weight, label in entries:
        key = (facet, verts)
        if key in merged:
            merged[key][0] += weight
        else:
            merged[key] = [weight, label]
    colors, legend = _assign_colors([w for w, _ in merged.values()])

    def lines_for(facet: str | None) -> tuple[PlotLine, ...]:
        return tuple(
            PlotLine(verts, w, lab, False, colors[w])
            for (f, verts), (w, lab) in merged.items()
            if f == facet
        )

    if facet_column is None:
        return PlotModel(axes, lines_for(None), (), None, legend)
    facets = []
    for level in _facet_levels(table, facet_column):
        sub_lines = lines_for(level)
        if sub_lines:
            facets.append((level, PlotModel(axes, sub_lines, (), None, legend)))
    return PlotModel(axes, (), (), tuple(facets), legend)


def _pattern_entries(
    selection: Sequence[tuple[Pattern, float]],
    table: Table,
    names: Sequence[str],
    facet_column: str | None,
):
    for c in table.columns:
        if not c.is_discrete:
            raise ValueError(
                f"column {c.name!r} is continuous; pattern plots need an all-discrete table"
            )
    positions = {
        c.name: _level_positions(len(c.levels)) for c in table.columns
    }
    col_idx = {c.name: j for j, c in enumerate(table.columns)}
    facet_idx = col_idx[facet_column] if facet_column is not None else None
    entries = []
    for pattern, weight in selection:
        if len(pattern) != table.p:
            raise ValueError(
                f"pattern arity {len(pattern)} does not match the {table.p} table columns"
            )
        verts = tuple(positions[n][pattern[col_idx[n]]] for n in names)
        facet = None
        if facet_idx is not None:
            facet = table.columns[facet_idx].levels[pattern[facet_idx]]
        entries.append((facet, verts, float(weight), None))
    return entries


def _density_entries(
    selection: Sequence[DensityScore],
    table: Table,
    names: Sequence[str],
    labels: bool,
    facet_column: str | None,
    row_labels: Mapping[int, str] | None = None,
):
    spans = {}
    for n in names:
        col = table.column(n)
        obs = col.values[~np.isnan(col.values)]
        lo = float(obs.min()) if obs.size else 0.0
        hi = float(obs.max()) if obs.size else 1.0
        spans[n] = (lo, hi - lo)
    facet_col = table.column(facet_column) if facet_column is not None else None
    entries = []
    for score in selection:
        r = score.row_index
        verts = []
        for n in names:
            v = float(table.column(n).values[r])
            if math.isnan(v):
                raise ValueError(f"row {r} has a missing value in column {n!r}")
            lo, span = spans[n]
            verts.append((v - lo) / span if span > 0 else 0.5)
        facet = None
        if facet_col is not None:
            code = int(facet_col.values[r])
            if code == NA_CODE:
                raise ValueError(f"row {r} has a missing facet value")
            facet = facet_col.levels[code]
        label = None
        if labels:
            label = row_labels[r] if row_labels is not None else str(r)
        entries.append((facet, tuple(verts), float(score.density), label))
    return entries


def _line_matches(line: PlotLine, cond: BrushCondition, model: PlotModel) -> bool:
    i = model.axis_index(cond.axis)
    v = line.verts[i]
    if cond.levels is not None:
        axis = model.axes[i]
        return any(abs(v - axis.pos_of(l)) <= _POS_TOL for l in cond.levels)
    lo, hi = cond.interval
    return lo - _POS_TOL <= v <= hi + _POS_TOL


def apply_brush(model: PlotModel, conditions: Sequence[BrushCondition]) -> PlotModel:
    """Flag lines satisfying every condition; others stay but de-emphasized."""
    conds = tuple(conditions)
    if not conds:
        return model
    for cond in conds:
        i = model.axis_index(cond.axis)
        if cond.levels is not None:
            for l in cond.levels:
                model.axes[i].pos_of(l)  # raises on unknown level

    def rebrush(m: PlotModel) -> PlotModel:
        lines = tuple(
            dataclasses.replace(
                l, highlighted=all(_line_matches(l, c, model) for c in conds)
            )
            for l in m.lines
        )
        facets = None
        if m.facets is not None:
            facets = tuple((lev, rebrush(sub)) for lev, sub in m.facets)
        return dataclasses.replace(m, lines=lines, brush=conds, facets=facets)

    return rebrush(model)


def permute_columns(model: PlotModel, new_order: Sequence[str]) -> PlotModel:
    """Reorder axes and every line's vertices; weights and brush state persist."""
    names = [a.name for a in model.axes]
    if sorted(new_order) != sorted(names):
        raise ValueError(
            f"new order {list(new_order)} is not a permutation of axes {names}"
        )
    idx = [names.index(n) for n in new_order]

    def reorder(m: PlotModel) -> PlotModel:
        axes = tuple(m.axes[i] for i in idx)
        lines = tuple(
            dataclasses.replace(l, verts=tuple(l.verts[i] for i in idx))
            for l in m.lines
        )
        facets = None
        if m.facets is not None:
            facets = tuple((lev, reorder(sub)) for lev, sub in m.facets)
        return dataclasses.replace(m, axes=axes, lines=lines, facets=facets)

    return reorder(model)


# -- serialization ------------------------------------------------------------


def to_dict(model: PlotModel) -> dict:
    d: dict = {
        "axes": [
            {"name": a.name, "ticks": [{"label": t.label, "pos": t.pos} for t in a.ticks]}
            for a in model.axes
        ],
        "lines": [_line_dict(l) for l in model.lines],
        "brush": [_brush_dict(b) for b in model.brush],
        "legend": [
            {"weight_range": [e.weight_range[0], e.weight_range[1]], "color": e.color}
            for e in model.legend
        ],
    }
    if model.facets is not None:
        d["facets"] = {level: to_dict(sub) for level, sub in model.facets}
    return d


def _line_dict(l: PlotLine) -> dict:
    d: dict = {"verts": list(l.verts), "weight": l.weight}
    if l.label is not None:
        d["label"] = l.label
    d["highlighted"] = l.highlighted
    d["color"] = l.color
    return d


def _brush_dict(b: BrushCondition) -> dict:
    if b.levels is not None:
        return {"axis": b.axis, "levels": list(b.levels)}
    return {"axis": b.axis, "interval": [b.interval[0], b.interval[1]]}


def brush_from_dict(d: Mapping) -> BrushCondition:
    if "axis" not in d:
        raise ValueError("brush condition needs an axis")
    if ("levels" in d) == ("interval" in d):
        raise ValueError("brush condition needs exactly one of levels/interval")
    if "levels" in d:
        levels = d["levels"]
        if not isinstance(levels, (list, tuple)) or not levels:
            raise ValueError("levels must be a nonempty list")
        return BrushCondition(str(d["axis"]), levels=tuple(str(l) for l in levels))
    iv = d["interval"]
    if not isinstance(iv, (list, tuple)) or len(iv) != 2:
        raise ValueError("interval must be [lo, hi]")
    return BrushCondition(str(d["axis"]), interval=(float(iv[0]), float(iv[1])))


def from_dict(d: Mapping) -> PlotModel:
    axes = tuple(
        Axis(a["name"], tuple(AxisTick(t["label"], float(t["pos"])) for t in a["ticks"]))
        for a in d["axes"]
    )
    lines = tuple(
        PlotLine(
            tuple(float(v) for v in l["verts"]),
            float(l["weight"]),
            l.get("label"),
            bool(l["highlighted"]),
            int(l["color"]),
        )
        for l in d["lines"]
    )
    brush = tuple(brush_from_dict(b) for b in d.get("brush", ()))
    legend = tuple(
        LegendEntry((float(e["weight_range"][0]), float(e["weight_range"][1])), e["color"])
        for e in d.get("legend", ())
    )
    facets = None
    if "facets" in d:
        facets = tuple((level, from_dict(sub)) for level, sub in d["facets"].items())
    return PlotModel(axes, lines, brush, facets, legend)


def emit_json(model: PlotModel, sink: IO | None = None) -> str:
    """Serialize losslessly; identical models give identical bytes."""
    text = json.dumps(to_dict(model))
    if sink is not None:
        try:
            sink.write(text)
        except TypeError:
            sink.write(text.encode("utf-8"))
    return text


def parse_json(source: bytes | str) -> PlotModel:
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        return from_dict(json.loads(source))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed plot model JSON: {exc}") from exc


# -- SVG ----------------------------------------------------------------------

_PANEL_W = 660.0
_PANEL_H = 300.0
_MARGIN_L = 70.0
_MARGIN_R = 30.0
_MARGIN_T = 40.0
_MARGIN_B = 30.0
_LEGEND_W = 190.0


def _f(x: float) -> str:
    return f"{x:.2f}"


def _panel_svg(model: PlotModel, out: list[str], top: float, title: str | None) -> None:
    q = len(model.axes)
    xs = [
        _MARGIN_L + (_PANEL_W * j / (q - 1) if q > 1 else _PANEL_W / 2)
        for j in range(q)
    ]
    y0, y1 = top + _MARGIN_T, top + _MARGIN_T + _PANEL_H

    def ypix(pos: float) -> float:
        return y1 - pos * (y1 - y0)

    if title is not None:
        out.append(
            f'<text x="{_f(_MARGIN_L)}" y="{_f(top + 22)}" font-size="14" '
            f'font-weight="bold">{escape(title)}</text>'
        )
    brushing = bool(model.brush)
    order = sorted(range(len(model.lines)), key=lambda i: (model.lines[i].highlighted, i))
    for i in order:
        line = model.lines[i]
        pts = " ".join(f"{_f(x)},{_f(ypix(v))}" for x, v in zip(xs, line.verts))
        if brushing:
            opacity, width = ("1.0", "2.5") if line.highlighted else ("0.15", "1.0")
        else:
            opacity, width = "0.85", "1.5"
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{PALETTE[line.color]}" '
            f'stroke-opacity="{opacity}" stroke-width="{width}"/>'
        )
        if line.label is not None:
            out.append(
                f'<text x="{_f(xs[-1] + 5)}" y="{_f(ypix(line.verts[-1]) + 4)}" '
                f'font-size="11">{escape(line.label)}</text>'
            )
    for j, axis in enumerate(model.axes):
        out.append(
            f'<line x1="{_f(xs[j])}" y1="{_f(y0)}" x2="{_f(xs[j])}" y2="{_f(y1)}" '
            'stroke="#444444" stroke-width="1.0"/>'
        )
        out.append(
            f'<text x="{_f(xs[j])}" y="{_f(y0 - 8)}" font-size="12" '
            f'text-anchor="middle">{escape(axis.name)}</text>'
        )
        for t in axis.ticks:
            y = ypix(t.pos)
            out.append(
                f'<line x1="{_f(xs[j] - 3)}" y1="{_f(y)}" x2="{_f(xs[j] + 3)}" '
                f'y2="{_f(y)}" stroke="#444444" stroke-width="1.0"/>'
            )
            out.append(
                f'<text x="{_f(xs[j] - 6)}" y="{_f(y + 3)}" font-size="10" '
                f'text-anchor="end">{escape(t.label)}</text>'
            )
    for cond in model.brush:
        j = model.axis_index(cond.axis)
        if cond.levels is not None:
            pos = [model.axes[j].pos_of(l) for l in cond.levels]
            lo, hi = min(pos), max(pos)
            half_step = 0.5 / max(len(model.axes[j].ticks) - 1, 1)
            lo, hi = max(lo - half_step / 2, 0.0), min(hi + half_step / 2, 1.0)
        else:
            lo, hi = cond.interval
        out.append(
            f'<line x1="{_f(xs[j])}" y1="{_f(ypix(lo))}" x2="{_f(xs[j])}" '
            f'y2="{_f(ypix(hi))}" stroke="{BRUSH_COLOR}" stroke-width="5.0" '
            'stroke-opacity="0.8"/>'
        )


def emit_svg(model: PlotModel, sink: IO | None = None) -> str:
    """Deterministic SVG 1.1 rendering: axes, lines, brush marks, legend."""
    panels = model.facets if model.facets is not None else ((None, model),)
    n_panels = max(len(panels), 1)
    panel_h = _MARGIN_T + _PANEL_H + _MARGIN_B
    width = _MARGIN_L + _PANEL_W + _MARGIN_R + _LEGEND_W
    height = panel_h * n_panels
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_f(width)}" height="{_f(height)}" '
        f'viewBox="0 0 {_f(width)} {_f(height)}">',
        f'<rect width="{_f(width)}" height="{_f(height)}" fill="#ffffff"/>',
    ]
    for i, (level, panel) in enumerate(panels):
        sub = dataclasses.replace(panel, brush=model.brush) if model.facets else panel
        _panel_svg(sub, out, i * panel_h, level)
    lx = _MARGIN_L + _PANEL_W + _MARGIN_R + 10
    out.append(
        f'<text x="{_f(lx)}" y="{_f(_MARGIN_T - 10)}" font-size="12" '
        'font-weight="bold">frequency</text>'
    )
    for i, entry in enumerate(model.legend):
        y = _MARGIN_T + 8 + i * 20
        out.append(
            f'<rect x="{_f(lx)}" y="{_f(y)}" width="14" height="14" '
            f'fill="{entry.color}"/>'
        )
        lo, hi = entry.weight_range
        text = format(hi, ".4g") if lo == hi else f"{format(lo, '.4g')} - {format(hi, '.4g')}"
        out.append(
            f'<text x="{_f(lx + 20)}" y="{_f(y + 11)}" font-size="11">{escape(text)}</text>'
        )
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if sink is not None:
        try:
            sink.write(text)
        except TypeError:
            sink.write(text.encode("utf-8"))
    return text

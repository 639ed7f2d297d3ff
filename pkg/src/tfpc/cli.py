"""Command-line entry point: load, discretize or scale, count or score, plot.

Exit codes: 0 on success, 1 on any pipeline error, 2 on flag misuse.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .counting import export_frequencies, top_patterns
from .discretize import DiscretizeSpec, jitter, subsample
from .pipeline import COUNT_METHODS, compute_frequencies, density_selection, ensure_discrete
from .plot import build_plot, emit_json, emit_svg
from .table import load_csv


def _parse_nlevels(values: list[str] | None) -> DiscretizeSpec:
    nlevels = 10
    overrides: dict[str, int] = {}
    for v in values or []:
        if "=" in v:
            name, _, count = v.partition("=")
            overrides[name] = int(count)
        else:
            nlevels = int(v)
    return DiscretizeSpec(nlevels, overrides)


def _parse_accentuate(value: str | None) -> tuple[str, str, float] | None:
    if value is None:
        return None
    column, sep, rest = value.partition("=")
    level, sep2, mult = rest.rpartition(":")
    if not sep or not sep2:
        raise ValueError(
            f"accentuate must look like col=level:mult, got {value!r}"
        )
    return column, level, float(mult)


def _parse_order(value: str | None) -> list[str] | None:
    if value is None:
        return None
    return [c.strip() for c in value.split(",") if c.strip()]


def _load(path: str):
    with open(path, "rb") as f:
        return load_csv(f)


def _emit(model, args, ft=None) -> None:
    wrote = False
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as f:
            emit_svg(model, f)
        wrote = True
    if args.json:
        with open(args.json, "w", encoding="utf-8") as f:
            emit_json(model, f)
        wrote = True
    if ft is not None and getattr(args, "export_freq", None):
        with open(args.export_freq, "w", encoding="utf-8") as f:
            export_frequencies(ft, f)
        wrote = True
    if not wrote:
        _print_lines(model)


def _print_lines(model) -> None:
    panels = model.facets if model.facets is not None else ((None, model),)
    names = "\t".join(a.name for a in model.axes)
    print(f"{names}\tweight")
    for level, panel in panels:
        prefix = f"[{level}] " if level is not None else ""
        for line in panel.lines:
            cells = []
            for axis, v in zip(panel.axes, line.verts):
                hit = [t.label for t in axis.ticks if abs(t.pos - v) <= 1e-9]
                cells.append(hit[0] if hit else format(v, ".4g"))
            print(prefix + "\t".join(cells) + f"\t{line.weight:g}")


def _run_count(args) -> int:
    table = _load(args.input)
    if args.subsample is not None:
        table = subsample(table, args.subsample, seed=args.seed)
    table = ensure_discrete(table, _parse_nlevels(args.nlevels))
    method = args.na_method
    if method is None:
        method = "naexp" if args.naexp is not None else "drop"
    ft = compute_frequencies(
        table,
        method=method,
        naexp=args.naexp if args.naexp is not None else 1.0,
        accentuate=_parse_accentuate(args.accentuate),
        threads=args.threads,
    )
    selection = top_patterns(ft, args.lines)
    model = build_plot(
        selection, table, column_order=_parse_order(args.order), facet_column=args.group
    )
    _emit(model, args, ft)
    return 0


def _run_density(args) -> int:
    table = _load(args.input)
    if args.subsample is not None:
        table = subsample(table, args.subsample, seed=args.seed)
    if args.jitter is not None:
        table = jitter(table, args.jitter, seed=args.seed)
    selection, scaled, kept = density_selection(
        table, k=args.k, lines=args.lines, locmax=args.locmax, group=args.group
    )
    model = build_plot(
        selection,
        scaled,
        column_order=_parse_order(args.order),
        labels=args.labels,
        facet_column=args.group,
        row_labels={i: str(orig) for i, orig in enumerate(kept)},
    )
    _emit(model, args)
    return 0


def _run_serve(args) -> int:
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(max_bytes=args.max_bytes), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tfpc",
        description="Parallel coordinates plots of only the most (or least) frequent patterns",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    count = sub.add_parser("count", help="discretize, count tuple frequencies, plot top lines")
    count.add_argument("input", help="CSV file")
    count.add_argument("--lines", type=int, default=50,
                       help="lines to plot; negative selects the least frequent")
    count.add_argument("--nlevels", action="append",
                       help="quantile levels, either K or col=K (repeatable)")
    count.add_argument("--na-method", choices=COUNT_METHODS, default=None,
                       help="how rows with missing cells count (default drop)")
    count.add_argument("--naexp", type=float, default=None,
                       help="partial-credit exponent; implies --na-method naexp")
    count.add_argument("--accentuate", default=None, metavar="COL=LEVEL:MULT",
                       help="multiply the weight of patterns containing a level")
    count.add_argument("--order", default=None, help="comma-separated axis order")
    count.add_argument("--group", default=None, help="facet column")
    count.add_argument("--threads", type=int, default=1)
    count.add_argument("--subsample", type=int, default=None, metavar="N",
                       help="count a random N-row subsample instead of all rows")
    count.add_argument("--seed", type=int, default=0)
    count.add_argument("--svg", default=None, help="write an SVG rendering here")
    count.add_argument("--json", default=None, help="write the plot model JSON here")
    count.add_argument("--export-freq", default=None,
                       help="write all patterns and frequencies as tab-separated text")
    count.set_defaults(func=_run_count)

    density = sub.add_parser("density", help="kNN-density scoring of continuous data")
    density.add_argument("input", help="CSV file")
    density.add_argument("--k", type=int, default=None, help="neighbor count")
    density.add_argument("--lines", type=int, default=50,
                         help="rows to plot; negative selects the least dense")
    density.add_argument("--locmax", action="store_true",
                         help="plot neighborhood density maxima instead of global top lines")
    density.add_argument("--group", default=None,
                         help="categorical column: estimate within groups, facet the plot")
    density.add_argument("--order", default=None, help="comma-separated axis order")
    density.add_argument("--labels", action="store_true", help="label lines with row indices")
    density.add_argument("--jitter", type=float, default=None,
                         help="jitter amount factor to break ties before estimation")
    density.add_argument("--subsample", type=int, default=None, metavar="N",
                         help="score a random N-row subsample instead of all rows")
    density.add_argument("--seed", type=int, default=0)
    density.add_argument("--svg", default=None, help="write an SVG rendering here")
    density.add_argument("--json", default=None, help="write the plot model JSON here")
    density.set_defaults(func=_run_density)

    serve = sub.add_parser("serve", help="run the HTTP API for the browser explorer")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--max-bytes", type=int, default=64 * 1024 * 1024,
                       help="reject dataset uploads over this size")
    serve.set_defaults(func=_run_serve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"tfpc: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

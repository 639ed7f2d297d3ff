"""Top-frequency parallel coordinates: plot only the most (or least) frequent
multivariate patterns instead of every row.

Continuous data is ranked by k-nearest-neighbor density; discrete or
discretized data by weighted tuple counts, with several ways to let rows
containing missing values contribute.
"""

from .counting import (
    CompletionCapError,
    CountConfig,
    FrequencyTable,
    Pattern,
    count_tuples,
    estimate_q,
    export_frequencies,
    frequency_table_from_probabilities,
    import_frequencies,
    top_patterns,
)
from .density import (
    DensityConfig,
    DensityScore,
    DuplicateRowsError,
    default_k,
    knn_density,
    locmax_rows,
    top_density_rows,
)
from .discretize import (
    DiscretizeSpec,
    ScaleParams,
    center_scale,
    discretize,
    jitter,
    subsample,
)
from .missing import (
    McarDiagnostic,
    MoMSystem,
    UnderdeterminedSystemError,
    build_mom_system,
    mar_update,
    mcar_diagnostic,
    mom_estimate,
    solve_mom_system,
)
from .plot import (
    Axis,
    AxisTick,
    BrushCondition,
    LegendEntry,
    PlotLine,
    PlotModel,
    apply_brush,
    build_plot,
    emit_json,
    emit_svg,
    parse_json,
    permute_columns,
)
from .table import (
    Column,
    CsvParseError,
    Table,
    complete_rows,
    emit_csv,
    load_csv,
    make_factor,
    re_order,
    set_levels,
)

__version__ = "0.1.0"

__all__ = [
    "Axis",
    "AxisTick",
    "BrushCondition",
    "Column",
    "CompletionCapError",
    "CountConfig",
    "CsvParseError",
    "DensityConfig",
    "DensityScore",
    "DiscretizeSpec",
    "DuplicateRowsError",
    "FrequencyTable",
    "LegendEntry",
    "McarDiagnostic",
    "MoMSystem",
    "Pattern",
    "PlotLine",
    "PlotModel",
    "ScaleParams",
    "Table",
    "UnderdeterminedSystemError",
    "apply_brush",
    "build_mom_system",
    "build_plot",
    "center_scale",
    "complete_rows",
    "count_tuples",
    "default_k",
    "discretize",
    "emit_csv",
    "emit_json",
    "emit_svg",
    "estimate_q",
    "export_frequencies",
    "frequency_table_from_probabilities",
    "import_frequencies",
    "jitter",
    "knn_density",
    "load_csv",
    "locmax_rows",
    "make_factor",
    "mar_update",
    "mcar_diagnostic",
    "mom_estimate",
    "parse_json",
    "permute_columns",
    "re_order",
    "set_levels",
    "solve_mom_system",
    "subsample",
    "top_density_rows",
    "top_patterns",
]

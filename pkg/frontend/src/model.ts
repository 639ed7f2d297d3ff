/** Plot-model JSON shapes served by the tfpc backend, plus a schema guard.
 *
 * The client never recomputes data: everything it draws comes from a
 * PlotModel fetched from the server, so validation failures must leave the
 * previous view in place rather than rendering garbage.
 */

export interface AxisTick {
  label: string;
  pos: number;
}

export interface PlotAxis {
  name: string;
  ticks: AxisTick[];
}

export interface PlotLine {
  verts: number[];
  weight: number;
  label?: string;
  highlighted: boolean;
  color: number;
}

export interface BrushConditionJson {
  axis: string;
  levels?: string[];
  interval?: [number, number];
}

export interface LegendEntry {
  weight_range: [number, number];
  color: string;
}

export interface PlotModel {
  axes: PlotAxis[];
  lines: PlotLine[];
  brush: BrushConditionJson[];
  legend: LegendEntry[];
  facets?: Record<string, PlotModel>;
}

export class SchemaError extends Error {}

function fail(path: string, why: string): never {
  throw new SchemaError(`plot model ${path}: ${why}`);
}

function checkNumber(v: unknown, path: string): number {
  if (typeof v !== "number" || !Number.isFinite(v)) fail(path, "expected a finite number");
  return v;
}

function checkString(v: unknown, path: string): string {
  if (typeof v !== "string") fail(path, "expected a string");
  return v;
}

function checkArray(v: unknown, path: string): unknown[] {
  if (!Array.isArray(v)) fail(path, "expected an array");
  return v;
}

/** Validate a decoded JSON value as a PlotModel; throws SchemaError. */
export function validatePlotModel(value: unknown, path = "$"): PlotModel {
  if (typeof value !== "object" || value === null) fail(path, "expected an object");
  const obj = value as Record<string, unknown>;

  const axes = checkArray(obj.axes, `${path}.axes`).map((a, i) => {
    const ax = a as Record<string, unknown>;
    const ticks = checkArray(ax.ticks, `${path}.axes[${i}].ticks`).map((t, j) => ({
      label: checkString((t as Record<string, unknown>).label, `${path}.axes[${i}].ticks[${j}].label`),
      pos: checkNumber((t as Record<string, unknown>).pos, `${path}.axes[${i}].ticks[${j}].pos`),
    }));
    return { name: checkString(ax.name, `${path}.axes[${i}].name`), ticks };
  });

  const lines = checkArray(obj.lines, `${path}.lines`).map((l, i) => {
    const ln = l as Record<string, unknown>;
    const verts = checkArray(ln.verts, `${path}.lines[${i}].verts`).map((v, j) =>
      checkNumber(v, `${path}.lines[${i}].verts[${j}]`),
    );
    if (verts.length !== axes.length)
      fail(`${path}.lines[${i}]`, `expected ${axes.length} vertices, got ${verts.length}`);
    const line: PlotLine = {
      verts,
      weight: checkNumber(ln.weight, `${path}.lines[${i}].weight`),
      highlighted: ln.highlighted === true,
      color: checkNumber(ln.color ?? 0, `${path}.lines[${i}].color`),
    };
    if (ln.label !== undefined && ln.label !== null)
      line.label = checkString(ln.label, `${path}.lines[${i}].label`);
    return line;
  });

  const brush = checkArray(obj.brush ?? [], `${path}.brush`).map((b, i) => {
    const br = b as Record<string, unknown>;
    const condition: BrushConditionJson = {
      axis: checkString(br.axis, `${path}.brush[${i}].axis`),
    };
    if (br.levels !== undefined) {
      condition.levels = checkArray(br.levels, `${path}.brush[${i}].levels`).map((l, j) =>
        checkString(l, `${path}.brush[${i}].levels[${j}]`),
      );
    } else if (br.interval !== undefined) {
      const iv = checkArray(br.interval, `${path}.brush[${i}].interval`);
      if (iv.length !== 2) fail(`${path}.brush[${i}].interval`, "expected [lo, hi]");
      condition.interval = [
        checkNumber(iv[0], `${path}.brush[${i}].interval[0]`),
        checkNumber(iv[1], `${path}.brush[${i}].interval[1]`),
      ];
    } else {
      fail(`${path}.brush[${i}]`, "needs levels or interval");
    }
    return condition;
  });

  const legend = checkArray(obj.legend ?? [], `${path}.legend`).map((e, i) => {
    const en = e as Record<string, unknown>;
    const range = checkArray(en.weight_range, `${path}.legend[${i}].weight_range`);
    if (range.length !== 2) fail(`${path}.legend[${i}].weight_range`, "expected [lo, hi]");
    return {
      weight_range: [
        checkNumber(range[0], `${path}.legend[${i}].weight_range[0]`),
        checkNumber(range[1], `${path}.legend[${i}].weight_range[1]`),
      ] as [number, number],
      color: checkString(en.color, `${path}.legend[${i}].color`),
    };
  });

  const model: PlotModel = { axes, lines, brush, legend };
  if (obj.facets !== undefined) {
    if (typeof obj.facets !== "object" || obj.facets === null || Array.isArray(obj.facets))
      fail(`${path}.facets`, "expected an object of sub-models");
    model.facets = {};
    for (const [level, sub] of Object.entries(obj.facets as Record<string, unknown>)) {
      model.facets[level] = validatePlotModel(sub, `${path}.facets[${level}]`);
    }
  }
  return model;
}

/** Hex color for a line: the legend bucket whose weight range contains it. */
export function colorForLine(model: PlotModel, line: PlotLine): string {
  for (const entry of model.legend) {
    if (line.weight >= entry.weight_range[0] && line.weight <= entry.weight_range[1]) {
      return entry.color;
    }
  }
  return "#888888";
}

export function axisNames(model: PlotModel): string[] {
  return model.axes.map((a) => a.name);
}

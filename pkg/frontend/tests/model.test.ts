import { describe, expect, it } from "vitest";

import { SchemaError, colorForLine, validatePlotModel } from "../src/model.js";

const good = {
  axes: [
    { name: "cut", ticks: [{ label: "Fair", pos: 0 }, { label: "Good", pos: 1 }] },
    { name: "price", ticks: [{ label: "405", pos: 0 }, { label: "900", pos: 1 }] },
  ],
  lines: [
    { verts: [0, 0.5], weight: 3.0, highlighted: false, color: 0 },
    { verts: [1, 1], weight: 1.0, label: "7", highlighted: true, color: 9 },
  ],
  brush: [{ axis: "cut", levels: ["Fair"] }],
  legend: [
    { weight_range: [3.0, 3.0], color: "#67001f" },
    { weight_range: [1.0, 1.0], color: "#053061" },
  ],
};

describe("validatePlotModel", () => {
  it("accepts the documented shape", () => {
    const model = validatePlotModel(JSON.parse(JSON.stringify(good)));
    expect(model.axes.map((a) => a.name)).toEqual(["cut", "price"]);
    expect(model.lines[1].label).toBe("7");
    expect(model.brush[0]).toEqual({ axis: "cut", levels: ["Fair"] });
  });

  it("accepts interval brushes and facets", () => {
    const faceted = {
      ...good,
      brush: [{ axis: "price", interval: [0.25, 0.75] }],
      facets: { A: { ...good, brush: [], facets: undefined } },
    };
    const model = validatePlotModel(JSON.parse(JSON.stringify(faceted)));
    expect(model.brush[0].interval).toEqual([0.25, 0.75]);
    expect(Object.keys(model.facets ?? {})).toEqual(["A"]);
  });

  it("rejects missing axes", () => {
    expect(() => validatePlotModel({ lines: [] })).toThrow(SchemaError);
  });

  it("rejects vertex counts that disagree with the axes", () => {
    const bad = JSON.parse(JSON.stringify(good));
    bad.lines[0].verts = [0.5];
    expect(() => validatePlotModel(bad)).toThrow(/expected 2 vertices/);
  });

  it("rejects non-numeric weights and malformed brushes", () => {
    const bad = JSON.parse(JSON.stringify(good));
    bad.lines[0].weight = "heavy";
    expect(() => validatePlotModel(bad)).toThrow(SchemaError);
    const badBrush = JSON.parse(JSON.stringify(good));
    badBrush.brush = [{ axis: "cut" }];
    expect(() => validatePlotModel(badBrush)).toThrow(/levels or interval/);
  });
});

describe("colorForLine", () => {
  it("resolves each line's hex via the legend weight ranges", () => {
    const model = validatePlotModel(JSON.parse(JSON.stringify(good)));
    expect(colorForLine(model, model.lines[0])).toBe("#67001f");
    expect(colorForLine(model, model.lines[1])).toBe("#053061");
  });

  it("falls back to gray for weights outside every bucket", () => {
    const model = validatePlotModel(JSON.parse(JSON.stringify(good)));
    expect(colorForLine(model, { ...model.lines[0], weight: 99 })).toBe("#888888");
  });
});

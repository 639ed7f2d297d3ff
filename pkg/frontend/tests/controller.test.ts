import { describe, expect, it } from "vitest";

import { PlotApi, PlotParams, UploadResult } from "../src/api.js";
import { Explorer, ViewHooks } from "../src/controller.js";
import { BrushConditionJson, PlotModel, SchemaError } from "../src/model.js";

function model(axes: string[]): PlotModel {
  return {
    axes: axes.map((name) => ({
      name,
      ticks: [
        { label: "a", pos: 0 },
        { label: "b", pos: 0.5 },
        { label: "c", pos: 1 },
      ],
    })),
    lines: [{ verts: axes.map(() => 0.5), weight: 1, highlighted: false, color: 0 }],
    brush: [],
    legend: [{ weight_range: [1, 1], color: "#000000" }],
  };
}

class FakeApi implements PlotApi {
  calls: Array<{ kind: string; payload: unknown }> = [];
  axes = ["x", "y", "z"];
  failNextOrder = false;
  gate: Promise<void> | null = null;

  private async maybeWait(): Promise<void> {
    if (this.gate) await this.gate;
  }

  async uploadDataset(): Promise<UploadResult> {
    this.calls.push({ kind: "upload", payload: null });
    return { session: "s1", n: 3, p: this.axes.length, columns: this.axes };
  }

  async fetchPlot(_session: string, params: PlotParams): Promise<PlotModel> {
    await this.maybeWait();
    this.calls.push({ kind: "plot", payload: { ...params } });
    return model(this.axes);
  }

  async postBrush(_session: string, conditions: BrushConditionJson[]): Promise<PlotModel> {
    await this.maybeWait();
    this.calls.push({ kind: "brush", payload: conditions });
    const m = model(this.axes);
    m.brush = conditions;
    return m;
  }

  async postOrder(_session: string, order: string[]): Promise<PlotModel> {
    await this.maybeWait();
    if (this.failNextOrder) {
      this.failNextOrder = false;
      throw new Error("order failed");
    }
    this.calls.push({ kind: "order", payload: [...order] });
    this.axes = [...order];
    return model(this.axes);
  }
}

interface Recorded {
  renders: Array<{ axes: string[]; preview: unknown }>;
  errors: string[];
}

function recordingHooks(): [ViewHooks, Recorded] {
  const record: Recorded = { renders: [], errors: [] };
  const hooks: ViewHooks = {
    render: (m, preview) =>
      record.renders.push({ axes: m.axes.map((a) => a.name), preview }),
    showError: (message) => record.errors.push(message),
    clearError: () => {},
  };
  return [hooks, record];
}

async function freshExplorer(): Promise<[Explorer, FakeApi, Recorded]> {
  const api = new FakeApi();
  const [hooks, record] = recordingHooks();
  const explorer = new Explorer(api, hooks);
  await explorer.upload("x,y,z\n1,2,3\n");
  return [explorer, api, record];
}

describe("upload and controls", () => {
  it("uploads, then fetches a plot with the default controls", async () => {
    const [, api] = await freshExplorer();
    expect(api.calls.map((c) => c.kind)).toEqual(["upload", "plot"]);
    expect((api.calls[1].payload as PlotParams).lines).toBe(50);
  });

  it("control changes refetch with merged parameters", async () => {
    const [explorer, api] = await freshExplorer();
    await explorer.setControls({ lines: -25, method: "naexp" });
    const last = api.calls.at(-1)!;
    expect(last.kind).toBe("plot");
    expect(last.payload).toMatchObject({ lines: -25, method: "naexp", nlevels: 10 });
  });
});

describe("brush gestures", () => {
  it("maps an extent to the levels whose ticks it covers", async () => {
    const [explorer, api] = await freshExplorer();
    await explorer.brushGesture("y", [0.4, 1.0]);
    expect(api.calls.at(-1)).toEqual({
      kind: "brush",
      payload: [{ axis: "y", levels: ["b", "c"] }],
    });
  });

  it("accumulates conditions across axes as a conjunction", async () => {
    const [explorer, api] = await freshExplorer();
    await explorer.brushGesture("x", [0, 0.1]);
    await explorer.brushGesture("z", [0.9, 1]);
    expect(api.calls.at(-1)).toEqual({
      kind: "brush",
      payload: [
        { axis: "x", levels: ["a"] },
        { axis: "z", levels: ["c"] },
      ],
    });
  });

  it("an empty extent clears only that axis's condition", async () => {
    const [explorer, api] = await freshExplorer();
    await explorer.brushGesture("x", [0, 0.1]);
    await explorer.brushGesture("z", [0.9, 1]);
    await explorer.brushGesture("x", null);
    expect(api.calls.at(-1)).toEqual({
      kind: "brush",
      payload: [{ axis: "z", levels: ["c"] }],
    });
  });

  it("clearing every axis sends an empty condition list", async () => {
    const [explorer, api] = await freshExplorer();
    await explorer.brushGesture("x", [0, 1]);
    await explorer.brushGesture("x", null);
    expect(api.calls.at(-1)).toEqual({ kind: "brush", payload: [] });
    expect(explorer.model!.brush).toEqual([]);
  });

  it("uses intervals instead of levels in density mode", async () => {
    const [explorer, api] = await freshExplorer();
    await explorer.setControls({ method: "density" });
    await explorer.brushGesture("x", [0.25, 0.75]);
    expect(api.calls.at(-1)).toEqual({
      kind: "brush",
      payload: [{ axis: "x", interval: [0.25, 0.75] }],
    });
  });

  it("replaying the same gestures produces the same requests and view", async () => {
    const run = async () => {
      const [explorer, api, record] = await freshExplorer();
      await explorer.brushGesture("x", [0, 0.6]);
      await explorer.brushGesture("y", [0.5, 0.5]);
      return [api.calls, record.renders] as const;
    };
    const [callsA, rendersA] = await run();
    const [callsB, rendersB] = await run();
    expect(callsA).toEqual(callsB);
    expect(rendersA).toEqual(rendersB);
  });
});

describe("column drags", () => {
  it("commits a drop as a full permutation", async () => {
    const [explorer, api] = await freshExplorer();
    explorer.beginColumnDrag("z");
    explorer.previewColumnDrag(0);
    await explorer.commitColumnDrag();
    expect(api.calls.at(-1)).toEqual({ kind: "order", payload: ["z", "x", "y"] });
  });

  it("previews locally without a request until drop", async () => {
    const [explorer, api, record] = await freshExplorer();
    const before = api.calls.length;
    explorer.beginColumnDrag("x");
    explorer.previewColumnDrag(2);
    expect(api.calls.length).toBe(before);
    expect(record.renders.at(-1)).toEqual({
      axes: ["x", "y", "z"],
      preview: { axis: "x", toIndex: 2 },
    });
  });

  it("dropping at the original position issues no request", async () => {
    const [explorer, api] = await freshExplorer();
    const before = api.calls.length;
    explorer.beginColumnDrag("y");
    explorer.previewColumnDrag(1);
    await explorer.commitColumnDrag();
    expect(api.calls.length).toBe(before);
  });

  it("reverts and reports when the order request fails", async () => {
    const [explorer, api, record] = await freshExplorer();
    api.failNextOrder = true;
    explorer.beginColumnDrag("z");
    explorer.previewColumnDrag(0);
    await explorer.commitColumnDrag();
    await explorer.idle();
    expect(record.errors).toContain("order failed");
    expect(record.renders.at(-1)).toEqual({ axes: ["x", "y", "z"], preview: null });
  });
});

describe("request coalescing", () => {
  it("keeps at most one request in flight and drops stale work", async () => {
    const [explorer, api] = await freshExplorer();
    let release!: () => void;
    api.gate = new Promise((resolve) => (release = resolve));
    const before = api.calls.length;
    void explorer.setControls({ lines: 10 });
    void explorer.setControls({ lines: 20 });
    void explorer.setControls({ lines: 30 });
    release();
    api.gate = null;
    await explorer.idle();
    const plots = api.calls.slice(before).filter((c) => c.kind === "plot");
    // the first request was already in flight; the middle one was replaced
    expect(plots.length).toBeLessThanOrEqual(2);
    expect((plots.at(-1)!.payload as PlotParams).lines).toBe(30);
  });

  it("rapid drags settle on the final order", async () => {
    const [explorer, api] = await freshExplorer();
    let release!: () => void;
    api.gate = new Promise((resolve) => (release = resolve));
    explorer.beginColumnDrag("z");
    explorer.previewColumnDrag(0);
    void explorer.commitColumnDrag();
    explorer.beginColumnDrag("y");
    explorer.previewColumnDrag(0);
    void explorer.commitColumnDrag();
    release();
    api.gate = null;
    await explorer.idle();
    const orders = api.calls.filter((c) => c.kind === "order");
    expect((orders.at(-1)!.payload as string[])[0]).toBe("y");
  });
});

describe("schema failures", () => {
  it("keeps the previous view and shows a banner", async () => {
    const api = new FakeApi();
    const [hooks, record] = recordingHooks();
    const explorer = new Explorer(api, hooks);
    await explorer.upload("x,y,z\n1,2,3\n");
    const goodRenders = record.renders.length;
    api.fetchPlot = async () => {
      throw new SchemaError("plot model $.axes: expected an array");
    };
    await explorer.setControls({ lines: 5 });
    expect(record.renders.length).toBe(goodRenders); // nothing re-rendered
    expect(record.errors.length).toBeGreaterThan(0);
  });
});

/** Round trip against the real backend: upload -> brush -> reorder.
 *
 * Spawns the Python server in a child process; every assertion checks the
 * JSON the server actually returned, not client-side state.
 */

import { ChildProcess, spawn } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { Explorer, ViewHooks } from "../src/controller.js";
import { PlotModel } from "../src/model.js";

const PORT = 8931;
const BASE = `http://127.0.0.1:${PORT}`;

const PLAYERS_CSV = [
  "Height,Weight,Age,PosCategory",
  "74,210,25,Catcher",
  "70,180,30,Infielder",
  "74,210,25,Catcher",
  "71,190,31,Outfielder",
  "74,215,25,Catcher",
  "70,180,30,Infielder",
].join("\n");

let server: ChildProcess;

async function waitForServer(): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt += 1) {
    try {
      const response = await fetch(`${BASE}/health`);
      if (response.ok) return;
    } catch {
      /* not up yet */
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw new Error("backend did not come up");
}

beforeAll(async () => {
  server = spawn(
    "python3",
    ["-m", "uvicorn", "tfpc.server:app", "--port", String(PORT), "--log-level", "warning"],
    { stdio: "ignore" },
  );
  await waitForServer();
}, 30_000);

afterAll(() => {
  server.kill();
});

function silentHooks(): ViewHooks {
  return { render: () => {}, showError: () => {}, clearError: () => {} };
}

function catcherAxisIndex(model: PlotModel): number {
  return model.axes.findIndex((a) => a.name === "PosCategory");
}

describe("server round trip", () => {
  it("brushing the Catcher level highlights exactly the matching lines", async () => {
    const explorer = new Explorer(new ApiClient(BASE), silentHooks());
    await explorer.upload(PLAYERS_CSV);
    await explorer.idle();

    const axis = explorer.model!.axes[catcherAxisIndex(explorer.model!)];
    const catcherPos = axis.ticks.find((t) => t.label === "Catcher")!.pos;
    await explorer.brushGesture("PosCategory", [catcherPos, catcherPos]);
    await explorer.idle();

    const served = explorer.model!;
    expect(served.brush).toEqual([{ axis: "PosCategory", levels: ["Catcher"] }]);
    const i = catcherAxisIndex(served);
    const matching = served.lines.filter((l) => Math.abs(l.verts[i] - catcherPos) < 1e-9);
    expect(matching.length).toBe(2); // (74,210,25) merged x2 and (74,215,25)
    for (const line of served.lines) {
      expect(line.highlighted).toBe(matching.includes(line));
    }
  });

  it("dragging Age to the far left reorders the served axes", async () => {
    const explorer = new Explorer(new ApiClient(BASE), silentHooks());
    await explorer.upload(PLAYERS_CSV);
    await explorer.idle();

    explorer.beginColumnDrag("Age");
    explorer.previewColumnDrag(0);
    await explorer.commitColumnDrag();
    await explorer.idle();

    const served = explorer.model!;
    expect(served.axes.map((a) => a.name)).toEqual([
      "Age",
      "Height",
      "Weight",
      "PosCategory",
    ]);
    // vertices moved with their axes: every line still has one vertex per axis
    for (const line of served.lines) {
      expect(line.verts).toHaveLength(4);
    }

    // the order sticks server-side for subsequent plots
    const again = await new ApiClient(BASE).fetchPlot(explorer.session!, {
      lines: 50,
      nlevels: 10,
      method: "drop",
      naexp: 1,
    });
    expect(again.axes.map((a) => a.name)).toEqual(["Age", "Height", "Weight", "PosCategory"]);
  });

  it("brush then reorder compose: highlights survive the permutation", async () => {
    const explorer = new Explorer(new ApiClient(BASE), silentHooks());
    await explorer.upload(PLAYERS_CSV);
    await explorer.idle();

    const axis = explorer.model!.axes[catcherAxisIndex(explorer.model!)];
    const catcherPos = axis.ticks.find((t) => t.label === "Catcher")!.pos;
    await explorer.brushGesture("PosCategory", [catcherPos, catcherPos]);
    explorer.beginColumnDrag("PosCategory");
    explorer.previewColumnDrag(0);
    await explorer.commitColumnDrag();
    await explorer.idle();

    const served = explorer.model!;
    expect(served.axes[0].name).toBe("PosCategory");
    expect(served.lines.filter((l) => l.highlighted)).toHaveLength(2);
  });
});

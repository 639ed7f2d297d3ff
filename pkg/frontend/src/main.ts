/** Page wiring: DOM controls and pointer gestures feeding the Explorer. */

import { ApiClient } from "./api.js";
import { Controls, DEFAULT_CONTROLS, Explorer } from "./controller.js";
import { axisPixelX, clearErrorBanner, render, showErrorBanner } from "./view.js";

function apiBase(): string {
  const override = new URLSearchParams(window.location.search).get("api");
  return override ?? "http://127.0.0.1:8000";
}

export function setup(root: HTMLElement): Explorer {
  const plot = root.querySelector<HTMLElement>("#plot")!;
  const explorer = new Explorer(new ApiClient(apiBase()), {
    render: (model, preview) => render(plot, model, { dragPreview: preview }),
    showError: (message) => showErrorBanner(root, message),
    clearError: () => clearErrorBanner(root),
  });

  const file = root.querySelector<HTMLInputElement>("#dataset")!;
  file.addEventListener("change", () => {
    const chosen = file.files?.[0];
    if (chosen) void explorer.upload(chosen);
  });

  const bindControl = (id: string, key: keyof Controls, parse: (v: string) => number | string) => {
    const input = root.querySelector<HTMLInputElement | HTMLSelectElement>(`#${id}`)!;
    input.addEventListener("change", () => {
      void explorer.setControls({ [key]: parse(input.value) } as Partial<Controls>);
    });
  };
  bindControl("lines", "lines", Number);
  bindControl("nlevels", "nlevels", Number);
  bindControl("naexp", "naexp", Number);
  bindControl("method", "method", String);

  // column drag: press an axis title, move horizontally, release to commit
  let draggingAxis = false;
  plot.addEventListener("pointerdown", (event) => {
    const target = event.target as Element;
    if (target.classList.contains("axis-title")) {
      explorer.beginColumnDrag(target.getAttribute("data-axis")!);
      draggingAxis = true;
      event.preventDefault();
    }
  });
  plot.addEventListener("pointermove", (event) => {
    if (!draggingAxis || !explorer.model) return;
    const count = explorer.model.axes.length;
    const bounds = plot.querySelector("svg")!.getBoundingClientRect();
    const x = event.clientX - bounds.left;
    let nearest = 0;
    for (let i = 1; i < count; i += 1) {
      if (Math.abs(x - axisPixelX(i, count)) < Math.abs(x - axisPixelX(nearest, count))) {
        nearest = i;
      }
    }
    explorer.previewColumnDrag(nearest);
  });
  plot.addEventListener("pointerup", () => {
    if (draggingAxis) {
      draggingAxis = false;
      void explorer.commitColumnDrag();
    }
  });

  // brush: press on an axis track and drag vertically; a click clears
  let brushStart: { axis: string; y: number; y0: number; y1: number } | null = null;
  plot.addEventListener("pointerdown", (event) => {
    const target = event.target as Element;
    if (target.classList.contains("axis-track")) {
      brushStart = {
        axis: target.getAttribute("data-axis")!,
        y: event.clientY,
        y0: Number(target.getAttribute("data-y0")),
        y1: Number(target.getAttribute("data-y1")),
      };
      event.preventDefault();
    }
  });
  plot.addEventListener("pointerup", (event) => {
    if (!brushStart) return;
    const { axis, y, y0, y1 } = brushStart;
    brushStart = null;
    const bounds = plot.querySelector("svg")!.getBoundingClientRect();
    const toPos = (clientY: number) => {
      const local = clientY - bounds.top;
      return Math.max(0, Math.min(1, (y1 - local) / (y1 - y0)));
    };
    if (Math.abs(event.clientY - y) < 3) {
      void explorer.brushGesture(axis, null); // empty extent clears the axis
    } else {
      void explorer.brushGesture(axis, [toPos(y), toPos(event.clientY)]);
    }
  });

  return explorer;
}

if (typeof document !== "undefined" && document.getElementById("plot")) {
  setup(document.body);
}

export { DEFAULT_CONTROLS };

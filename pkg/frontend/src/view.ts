/** SVG renderer: a pure function of the last PlotModel plus gesture previews.
 *
 * The server's model already fixes tick positions and vertex heights in
 * [0, 1]; this module only maps them to pixels. Axis titles and axis tracks
 * carry data-axis attributes so the controller can wire up drag and brush
 * gestures without the renderer knowing about them.
 */

import { PlotModel, colorForLine } from "./model.js";

export const SVG_NS = "http://www.w3.org/2000/svg";
export const BRUSH_COLOR = "#ff00ff";

const PANEL_WIDTH = 680;
const PANEL_HEIGHT = 300;
const MARGIN_LEFT = 70;
const MARGIN_TOP = 46;
const MARGIN_BOTTOM = 24;
const LEGEND_WIDTH = 180;

export interface DragPreview {
  axis: string;
  toIndex: number;
}

export interface RenderOptions {
  dragPreview?: DragPreview | null;
}

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, String(value));
  }
  return el;
}

function previewOrder(model: PlotModel, preview: DragPreview | null | undefined): number[] {
  const order = model.axes.map((_, i) => i);
  if (!preview) return order;
  const from = model.axes.findIndex((a) => a.name === preview.axis);
  if (from < 0) return order;
  order.splice(from, 1);
  order.splice(Math.max(0, Math.min(preview.toIndex, order.length)), 0, from);
  return order;
}

export function axisPixelX(index: number, count: number): number {
  if (count <= 1) return MARGIN_LEFT + PANEL_WIDTH / 2;
  return MARGIN_LEFT + (PANEL_WIDTH * index) / (count - 1);
}

function drawPanel(
  root: SVGElement,
  model: PlotModel,
  panel: PlotModel,
  axisOrder: number[],
  top: number,
  title: string | null,
): void {
  const y0 = top + MARGIN_TOP;
  const y1 = top + MARGIN_TOP + PANEL_HEIGHT;
  const yPix = (pos: number) => y1 - pos * (y1 - y0);
  const count = axisOrder.length;
  const brushing = model.brush.length > 0;

  if (title !== null) {
    const text = svgEl("text", { x: MARGIN_LEFT, y: top + 20, class: "facet-title" });
    text.textContent = title;
    root.appendChild(text);
  }

  const byEmphasis = [...panel.lines].sort(
    (a, b) => Number(a.highlighted) - Number(b.highlighted),
  );
  for (const line of byEmphasis) {
    const points = axisOrder
      .map((axisIdx, i) => `${axisPixelX(i, count)},${yPix(line.verts[axisIdx])}`)
      .join(" ");
    const attrs: Record<string, string | number> = {
      points,
      fill: "none",
      stroke: colorForLine(model, line),
      class: line.highlighted ? "line highlighted" : "line",
    };
    if (brushing) {
      attrs["stroke-opacity"] = line.highlighted ? "1.0" : "0.15";
      attrs["stroke-width"] = line.highlighted ? "2.5" : "1.0";
    } else {
      attrs["stroke-opacity"] = "0.85";
      attrs["stroke-width"] = "1.5";
    }
    root.appendChild(svgEl("polyline", attrs));
    if (line.label !== undefined) {
      const lastAxis = axisOrder[count - 1];
      const text = svgEl("text", {
        x: axisPixelX(count - 1, count) + 5,
        y: yPix(line.verts[lastAxis]) + 4,
        class: "row-label",
        "font-size": 11,
      });
      text.textContent = line.label;
      root.appendChild(text);
    }
  }

  axisOrder.forEach((axisIdx, i) => {
    const axis = model.axes[axisIdx];
    const x = axisPixelX(i, count);
    root.appendChild(
      svgEl("line", { x1: x, y1: y0, x2: x, y2: y1, stroke: "#444", class: "axis-line" }),
    );
    const title = svgEl("text", {
      x,
      y: y0 - 12,
      "text-anchor": "middle",
      class: "axis-title",
      "data-axis": axis.name,
    });
    title.textContent = axis.name;
    root.appendChild(title);
    for (const tick of axis.ticks) {
      const y = yPix(tick.pos);
      root.appendChild(
        svgEl("line", { x1: x - 3, y1: y, x2: x + 3, y2: y, stroke: "#444" }),
      );
      const label = svgEl("text", {
        x: x - 6,
        y: y + 3,
        "text-anchor": "end",
        "font-size": 10,
        class: "tick-label",
      });
      label.textContent = tick.label;
      root.appendChild(label);
    }
    // invisible hit area for brush gestures along the axis
    root.appendChild(
      svgEl("rect", {
        x: x - 8,
        y: y0,
        width: 16,
        height: y1 - y0,
        fill: "transparent",
        class: "axis-track",
        "data-axis": axis.name,
        "data-y0": y0,
        "data-y1": y1,
      }),
    );
  });

  for (const condition of model.brush) {
    const i = axisOrder.findIndex((idx) => model.axes[idx].name === condition.axis);
    if (i < 0) continue;
    const axis = model.axes[axisOrder[i]];
    let lo: number;
    let hi: number;
    if (condition.levels !== undefined) {
      const positions = axis.ticks
        .filter((t) => condition.levels!.includes(t.label))
        .map((t) => t.pos);
      if (positions.length === 0) continue;
      const pad = 0.25 / Math.max(axis.ticks.length - 1, 1);
      lo = Math.max(Math.min(...positions) - pad, 0);
      hi = Math.min(Math.max(...positions) + pad, 1);
    } else {
      [lo, hi] = condition.interval!;
    }
    const x = axisPixelX(i, count);
    root.appendChild(
      svgEl("line", {
        x1: x,
        y1: yPix(lo),
        x2: x,
        y2: yPix(hi),
        stroke: BRUSH_COLOR,
        "stroke-width": 5,
        "stroke-opacity": 0.8,
        class: "brush-mark",
      }),
    );
  }
}

function drawLegend(root: SVGElement, model: PlotModel, x: number): void {
  const header = svgEl("text", { x, y: MARGIN_TOP - 14, class: "legend-title" });
  header.textContent = "frequency";
  root.appendChild(header);
  model.legend.forEach((entry, i) => {
    const y = MARGIN_TOP + i * 20;
    root.appendChild(
      svgEl("rect", { x, y, width: 14, height: 14, fill: entry.color, class: "legend-swatch" }),
    );
    const [lo, hi] = entry.weight_range;
    const text = svgEl("text", { x: x + 20, y: y + 11, "font-size": 11 });
    text.textContent = lo === hi ? String(lo) : `${lo} - ${hi}`;
    root.appendChild(text);
  });
}

/** Replace `container`'s plot with a rendering of `model`. */
export function render(
  container: HTMLElement,
  model: PlotModel,
  options: RenderOptions = {},
): SVGSVGElement {
  const axisOrder = previewOrder(model, options.dragPreview);
  const panels: Array<[string | null, PlotModel]> = model.facets
    ? Object.entries(model.facets)
    : [[null, model]];
  const panelHeight = MARGIN_TOP + PANEL_HEIGHT + MARGIN_BOTTOM;
  const width = MARGIN_LEFT + PANEL_WIDTH + 40 + LEGEND_WIDTH;
  const height = panelHeight * Math.max(panels.length, 1);

  const svg = svgEl("svg", { width, height, viewBox: `0 0 ${width} ${height}` });
  svg.appendChild(svgEl("rect", { width, height, fill: "#ffffff" }));
  panels.forEach(([level, panel], i) => {
    drawPanel(svg, model, panel, axisOrder, i * panelHeight, level);
  });
  drawLegend(svg, model, MARGIN_LEFT + PANEL_WIDTH + 50);

  const previous = container.querySelector("svg");
  if (previous) previous.remove();
  container.appendChild(svg);
  return svg;
}

/** Show (or update) the error banner without touching the current plot. */
export function showErrorBanner(container: HTMLElement, message: string): void {
  let banner = container.querySelector<HTMLElement>(".error-banner");
  if (!banner) {
    banner = document.createElement("div");
    banner.className = "error-banner";
    container.prepend(banner);
  }
  banner.textContent = message;
}

export function clearErrorBanner(container: HTMLElement): void {
  container.querySelector(".error-banner")?.remove();
}

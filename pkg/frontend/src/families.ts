/**
 * The four figure families: convergence curves, per-frame utility
 * comparisons, UAV-count bars, and per-frame bandwidth stacks.
 *
 * Inputs are the experiment runner's aggregate CSVs. Rows can be narrowed
 * with `where` (column=value equality on the raw strings).
 */

import { Table, num, requireColumns } from "./csv.js";
import {
  DEFAULT_FRAME, Frame, LinearScale, PALETTE, axes, document, el, fmt, legend,
  polyline, text,
} from "./svg.js";

export type Where = Record<string, string>;

export interface PlotSpec {
  family: "convergence" | "utility-vs-frame" | "uav-counts" | "bandwidth-stack";
  title?: string;
  where?: Where;
  radar?: number;          // bandwidth-stack only
}

function filtered(table: Table, where: Where | undefined): Record<string, string>[] {
  if (!where) return table.rows;
  for (const key of Object.keys(where)) {
    if (!table.columns.includes(key)) {
      throw new Error(`filter column '${key}' not in input (${table.columns.join(", ")})`);
    }
  }
  return table.rows.filter((row) =>
    Object.entries(where).every(([key, value]) => Number(row[key]) === Number(value)
      || row[key] === value));
}

function seriesKey(row: Record<string, string>, columns: string[],
                   reserved: string[]): string {
  const parts = columns.filter((c) => !reserved.includes(c))
    .map((c) => `${c}=${row[c]}`);
  return parts.join(" ") || "series";
}

function lineChart(table: Table, spec: PlotSpec, xColumn: string,
                   family: string): string {
  requireColumns(table, [xColumn, "mean_utility"], family);
  const reserved = [xColumn, "mean_utility", "std_utility", "n"];
  const rows = filtered(table, spec.where);
  const series = new Map<string, [number, number][]>();
  for (const row of rows) {
    const key = seriesKey(row, table.columns, reserved);
    if (!series.has(key)) series.set(key, []);
    series.get(key)!.push([num(row, xColumn), num(row, "mean_utility")]);
  }
  const frame = DEFAULT_FRAME;
  const points = [...series.values()].flat();
  const xs = points.map((p) => p[0]);
  const ys = points.map((p) => p[1]);
  const x = new LinearScale(Math.min(0, ...xs), Math.max(1, ...xs),
                            frame.margin.left, frame.width - frame.margin.right);
  const yLo = Math.min(0, ...ys);
  const yHi = Math.max(...ys, yLo + 1e-6);
  const y = new LinearScale(yLo, yHi * 1.05, frame.height - frame.margin.bottom,
                            frame.margin.top);
  const body: string[] = [axes(frame, x, y, xColumn, "mean utility",
                               xColumn === "frame")];
  let index = 0;
  for (const [, pts] of series) {
    pts.sort((a, b) => a[0] - b[0]);
    body.push(polyline(pts.map(([px, py]) => [x.at(px), y.at(py)]),
                       PALETTE[index % PALETTE.length]));
    index += 1;
  }
  body.push(legend(frame, [...series.keys()]));
  return document(frame, spec.title ?? family, body.join("\n"));
}

export function renderConvergence(table: Table, spec: PlotSpec): string {
  return lineChart(table, spec, "iteration", "convergence");
}

export function renderUtilityVsFrame(table: Table, spec: PlotSpec): string {
  return lineChart(table, spec, "frame", "utility-vs-frame");
}

export function renderUavCounts(table: Table, spec: PlotSpec): string {
  requireColumns(table, ["frame", "task", "mean_count"], "uav-counts");
  const rows = filtered(table, spec.where);
  const frames = [...new Set(rows.map((r) => num(r, "frame")))].sort((a, b) => a - b);
  const tasks = [...new Set(rows.map((r) => num(r, "task")))].sort((a, b) => a - b);
  const frame = DEFAULT_FRAME;
  const maxCount = Math.max(1, ...rows.map((r) => num(r, "mean_count")));
  const x = new LinearScale(0, frames.length,
                            frame.margin.left, frame.width - frame.margin.right);
  const y = new LinearScale(0, maxCount * 1.15, frame.height - frame.margin.bottom,
                            frame.margin.top);
  const groupWidth = (x.at(1) - x.at(0)) * 0.8;
  const barWidth = groupWidth / tasks.length;
  const body: string[] = [axes(frame, new LinearScale(
    Math.min(...frames), Math.max(...frames), x.at(0.5),
    x.at(frames.length - 0.5)), y, "frame", "mean UAV count", true)];
  rows.forEach((row) => {
    const fi = frames.indexOf(num(row, "frame"));
    const ti = tasks.indexOf(num(row, "task"));
    const height = y.at(0) - y.at(num(row, "mean_count"));
    body.push(el("rect", {
      x: fmt(x.at(fi + 0.5) - groupWidth / 2 + ti * barWidth),
      y: fmt(y.at(num(row, "mean_count"))),
      width: fmt(barWidth * 0.92),
      height: fmt(Math.max(height, 0)),
      fill: PALETTE[ti % PALETTE.length],
    }));
  });
  body.push(legend(frame, tasks.map((t) => (t === 0 ? "idle" : `radar ${t}`))));
  return document(frame, spec.title ?? "UAV counts per task", body.join("\n"));
}

export function renderBandwidthStack(table: Table, spec: PlotSpec): string {
  requireColumns(table, ["frame", "uav", "task", "bandwidth_hz"], "bandwidth-stack");
  const radar = spec.radar ?? 1;
  const rows = filtered(table, spec.where)
    .filter((r) => num(r, "task") === radar && num(r, "bandwidth_hz") > 0);
  const frames = [...new Set(rows.map((r) => num(r, "frame")))].sort((a, b) => a - b);
  const uavs = [...new Set(rows.map((r) => num(r, "uav")))].sort((a, b) => a - b);
  const frame = DEFAULT_FRAME;
  const totals = new Map<number, number>();
  for (const f of frames) {
    totals.set(f, rows.filter((r) => num(r, "frame") === f)
      .reduce((acc, r) => acc + num(r, "bandwidth_hz"), 0));
  }
  const maxTotal = Math.max(1, ...totals.values());
  const x = new LinearScale(0, Math.max(frames.length, 1),
                            frame.margin.left, frame.width - frame.margin.right);
  const y = new LinearScale(0, (maxTotal / 1e6) * 1.18,
                            frame.height - frame.margin.bottom, frame.margin.top);
  const body: string[] = [axes(frame, new LinearScale(
    Math.min(...(frames.length ? frames : [0])),
    Math.max(...(frames.length ? frames : [1])),
    x.at(0.5), x.at(Math.max(frames.length, 1) - 0.5)), y,
    "frame", "allocated bandwidth (MHz)", true)];
  const barWidth = (x.at(1) - x.at(0)) * 0.6;
  frames.forEach((f, fi) => {
    let cumulative = 0;
    for (const row of rows.filter((r) => num(r, "frame") === f)) {
      const mhz = num(row, "bandwidth_hz") / 1e6;
      body.push(el("rect", {
        x: fmt(x.at(fi + 0.5) - barWidth / 2),
        y: fmt(y.at(cumulative + mhz)),
        width: fmt(barWidth),
        height: fmt(y.at(cumulative) - y.at(cumulative + mhz)),
        fill: PALETTE[uavs.indexOf(num(row, "uav")) % PALETTE.length],
        stroke: "#ffffff", "stroke-width": 0.6,
      }));
      cumulative += mhz;
    }
    body.push(text(x.at(fi + 0.5), y.at(cumulative) - 6,
                   `${fmt(Math.round(cumulative * 100) / 100)}`,
                   { "text-anchor": "middle", "font-size": 10, class: "total" }));
  });
  body.push(legend(frame, uavs.map((u) => `UAV ${u}`)));
  return document(frame, spec.title ?? `bandwidth towards radar ${radar}`,
                  body.join("\n"));
}

export function render(table: Table, spec: PlotSpec): string {
  switch (spec.family) {
    case "convergence": return renderConvergence(table, spec);
    case "utility-vs-frame": return renderUtilityVsFrame(table, spec);
    case "uav-counts": return renderUavCounts(table, spec);
    case "bandwidth-stack": return renderBandwidthStack(table, spec);
    default:
      throw new Error(`unknown family '${(spec as PlotSpec).family}'`);
  }
}

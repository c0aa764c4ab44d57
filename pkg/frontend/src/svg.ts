/**
 * Deterministic SVG assembly: fixed palette, fixed fonts, no timestamps or
 * generated ids, so identical inputs produce identical bytes.
 */

export const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
  "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
  "#98df8a",
];

export interface Frame {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
}

export const DEFAULT_FRAME: Frame = {
  width: 720,
  height: 440,
  margin: { top: 48, right: 168, bottom: 56, left: 72 },
};

export function fmt(value: number): string {
  if (!Number.isFinite(value)) return "0";
  const rounded = Math.round(value * 1e6) / 1e6;
  return String(rounded);
}

export class LinearScale {
  constructor(readonly lo: number, readonly hi: number,
              readonly rLo: number, readonly rHi: number) {}

  at(value: number): number {
    const span = this.hi - this.lo || 1;
    return this.rLo + ((value - this.lo) / span) * (this.rHi - this.rLo);
  }

  ticks(count = 6): number[] {
    const span = this.hi - this.lo || 1;
    const rawStep = span / count;
    const power = Math.pow(10, Math.floor(Math.log10(rawStep)));
    const step = [1, 2, 5, 10].map((k) => k * power)
      .find((k) => span / k <= count) ?? power * 10;
    const start = Math.ceil(this.lo / step) * step;
    const out: number[] = [];
    for (let v = start; v <= this.hi + 1e-12; v += step) {
      out.push(Math.round(v * 1e9) / 1e9);
    }
    return out;
  }
}

export function el(tag: string, attrs: Record<string, string | number>,
                   body = ""): string {
  const rendered = Object.entries(attrs)
    .map(([key, value]) => ` ${key}="${value}"`).join("");
  return body ? `<${tag}${rendered}>${body}</${tag}>` : `<${tag}${rendered}/>`;
}

export function text(x: number, y: number, body: string,
                     attrs: Record<string, string | number> = {}): string {
  return el("text", {
    x: fmt(x), y: fmt(y), "font-family": "Helvetica, Arial, sans-serif",
    "font-size": 12, fill: "#222", ...attrs,
  }, body);
}

export function polyline(points: [number, number][], stroke: string): string {
  const path = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  return el("polyline", {
    points: path, fill: "none", stroke, "stroke-width": 1.8,
  });
}

export function axes(frame: Frame, x: LinearScale, y: LinearScale,
                     xLabel: string, yLabel: string, xInteger = false): string {
  const { margin, width, height } = frame;
  const parts: string[] = [];
  const bottom = height - margin.bottom;
  parts.push(el("line", { x1: margin.left, y1: bottom, x2: width - margin.right,
                          y2: bottom, stroke: "#222" }));
  parts.push(el("line", { x1: margin.left, y1: margin.top, x2: margin.left,
                          y2: bottom, stroke: "#222" }));
  for (const t of x.ticks()) {
    if (xInteger && Math.abs(t - Math.round(t)) > 1e-9) continue;
    const px = x.at(t);
    parts.push(el("line", { x1: fmt(px), y1: bottom, x2: fmt(px), y2: bottom + 4,
                            stroke: "#222" }));
    parts.push(text(px, bottom + 18, fmt(t), { "text-anchor": "middle" }));
  }
  for (const t of y.ticks()) {
    const py = y.at(t);
    parts.push(el("line", { x1: margin.left - 4, y1: fmt(py), x2: margin.left,
                            y2: fmt(py), stroke: "#222" }));
    parts.push(text(margin.left - 8, py + 4, fmt(t), { "text-anchor": "end" }));
    parts.push(el("line", { x1: margin.left, y1: fmt(py), x2: width - margin.right,
                            y2: fmt(py), stroke: "#eee" }));
  }
  parts.push(text((margin.left + width - margin.right) / 2, height - 12, xLabel,
                  { "text-anchor": "middle" }));
  parts.push(text(16, (margin.top + bottom) / 2, yLabel, {
    "text-anchor": "middle",
    transform: `rotate(-90 16 ${fmt((margin.top + bottom) / 2)})`,
  }));
  return parts.join("\n");
}

export function legend(frame: Frame, labels: string[]): string {
  const x0 = frame.width - frame.margin.right + 12;
  return labels.map((label, i) => {
    const y = frame.margin.top + 8 + i * 18;
    return el("rect", { x: x0, y: y - 9, width: 12, height: 12,
                        fill: PALETTE[i % PALETTE.length] }) +
      text(x0 + 18, y + 2, label);
  }).join("\n");
}

export function document(frame: Frame, title: string, body: string): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${frame.width}" ` +
    `height="${frame.height}" viewBox="0 0 ${frame.width} ${frame.height}">`,
    el("rect", { x: 0, y: 0, width: frame.width, height: frame.height,
                 fill: "#ffffff" }),
    text(frame.width / 2, 24, title, { "text-anchor": "middle",
                                       "font-size": 15, "font-weight": "bold" }),
    body,
    "</svg>",
    "",
  ].join("\n");
}

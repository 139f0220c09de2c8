/** Minimal SVG string assembly: every renderer is a pure function from
 * parsed CSV content to SVG text, so output is byte-stable for fixed input. */

export const PALETTE = [
  "#4477aa", "#ee6677", "#228833", "#ccbb44",
  "#66ccee", "#aa3377", "#bbbbbb", "#222222",
];

export const FONT = "12px sans-serif";

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Fixed-notation tick label without float noise. */
export function fmt(value: number): string {
  if (value === 0) return "0";
  const abs = Math.abs(value);
  if (abs >= 1000 || abs < 0.001) return value.toExponential(1);
  return String(Number(value.toPrecision(4)));
}

export interface Scale {
  (x: number): number;
  domain: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const scale = ((x: number) => r0 + ((x - d0) / span) * (r1 - r0)) as Scale;
  scale.domain = domain;
  return scale;
}

/** Round tick positions covering [min, max] with a 1/2/5 step. */
export function ticks(min: number, max: number, count = 5): number[] {
  const span = max - min || 1;
  const raw = span / count;
  const mag = 10 ** Math.floor(Math.log10(raw));
  const step = [1, 2, 5, 10].map(m => m * mag).find(s => span / s <= count) ?? raw;
  const out: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + step / 1e9; v += step) {
    out.push(Math.abs(v) < step / 1e9 ? 0 : v);
  }
  return out;
}

export function tag(name: string, attrs: Record<string, string | number>, body = ""): string {
  const parts = Object.entries(attrs)
    .map(([k, v]) => `${k}="${v}"`)
    .join(" ");
  return body === "" && name !== "text"
    ? `<${name} ${parts}/>`
    : `<${name} ${parts}>${body}</${name}>`;
}

export function text(x: number, y: number, body: string,
                     extra: Record<string, string | number> = {}): string {
  return tag("text", { x: fmtCoord(x), y: fmtCoord(y), style: `font: ${FONT}`, ...extra },
             esc(body));
}

export function fmtCoord(v: number): number {
  return Math.round(v * 100) / 100;
}

export function svgDocument(width: number, height: number, body: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    tag("rect", { x: 0, y: 0, width, height, fill: "#ffffff" }),
    ...body,
    "</svg>",
    "",
  ].join("\n");
}

/** Left/bottom axes with tick marks and labels. */
export function axes(x: Scale, y: Scale, plot: { left: number; right: number; top: number; bottom: number },
                     yTicks: number[], yLabel: string): string[] {
  const parts: string[] = [];
  parts.push(tag("line", {
    x1: plot.left, y1: plot.bottom, x2: plot.right, y2: plot.bottom,
    stroke: "#333333", "stroke-width": 1,
  }));
  parts.push(tag("line", {
    x1: plot.left, y1: plot.top, x2: plot.left, y2: plot.bottom,
    stroke: "#333333", "stroke-width": 1,
  }));
  for (const t of yTicks) {
    const yy = fmtCoord(y(t));
    parts.push(tag("line", {
      x1: plot.left - 4, y1: yy, x2: plot.left, y2: yy,
      stroke: "#333333", "stroke-width": 1,
    }));
    parts.push(text(plot.left - 8, yy + 4, fmt(t), { "text-anchor": "end" }));
  }
  parts.push(text(14, (plot.top + plot.bottom) / 2, yLabel, {
    "text-anchor": "middle",
    transform: `rotate(-90 14 ${fmtCoord((plot.top + plot.bottom) / 2)})`,
  }));
  return parts;
}

export function legend(labels: string[], colors: string[], x: number, y: number): string[] {
  const parts: string[] = [];
  labels.forEach((label, i) => {
    const yy = y + i * 18;
    parts.push(tag("rect", { x, y: yy - 9, width: 12, height: 12, fill: colors[i % colors.length] }));
    parts.push(text(x + 18, yy + 1, label));
  });
  return parts;
}

import { Table, numeric, requireColumns } from "./csv.js";
import { aggregate, groupBy } from "./stats.js";
import {
  PALETTE, axes, fmtCoord, legend, linearScale, svgDocument, tag, text, ticks,
} from "./svg.js";

/** CS-onset-aligned prediction vs return overlay from profiles.csv,
 * averaged over trials (and seeds) at each offset. */
export function renderProfile(table: Table): string {
  requireColumns(table, ["offset", "us", "prediction", "return"]);
  const byOffset = groupBy(table.rows, r => r.offset);
  const offsets = [...byOffset.keys()].map(Number).sort((a, b) => a - b);
  const series = offsets.map(off => {
    const rows = byOffset.get(String(off))!;
    return {
      offset: off,
      prediction: aggregate(rows.map(r => numeric(r, "prediction"))).mean,
      ret: aggregate(rows.map(r => numeric(r, "return"))).mean,
      us: aggregate(rows.map(r => numeric(r, "us"))).mean,
    };
  });

  const values = series.flatMap(s => [s.prediction, s.ret]);
  const lo = Math.min(0, ...values);
  const hi = Math.max(...values, 1e-9);
  const width = 640;
  const height = 320;
  const plot = { left: 56, right: width - 150, top: 24, bottom: height - 48 };
  const x = linearScale([offsets[0], offsets[offsets.length - 1]],
                        [plot.left, plot.right]);
  const y = linearScale([lo, hi * 1.08], [plot.bottom, plot.top]);
  const parts = axes(x, y, plot, ticks(lo, hi * 1.08), "value");

  // light columns where the US is (on average) active
  for (const s of series) {
    if (s.us <= 0) continue;
    parts.push(tag("rect", {
      class: "us-band",
      x: fmtCoord(x(s.offset) - 3), y: plot.top,
      width: 6, height: plot.bottom - plot.top,
      fill: "#f2c14e", opacity: fmtCoord(0.25 + 0.5 * s.us),
    }));
  }
  // CS onset marker at offset zero
  if (offsets[0] <= 0 && offsets[offsets.length - 1] >= 0) {
    parts.push(tag("line", {
      class: "onset", x1: fmtCoord(x(0)), y1: plot.top,
      x2: fmtCoord(x(0)), y2: plot.bottom,
      stroke: "#999999", "stroke-dasharray": "4 3",
    }));
  }

  const path = (pick: (s: typeof series[number]) => number) => series
    .map((s, i) => `${i === 0 ? "M" : "L"}${fmtCoord(x(s.offset))},${fmtCoord(y(pick(s)))}`)
    .join(" ");
  parts.push(tag("path", {
    class: "return", d: path(s => s.ret), fill: "none",
    stroke: PALETTE[1], "stroke-width": 2,
  }));
  parts.push(tag("path", {
    class: "prediction", d: path(s => s.prediction), fill: "none",
    stroke: PALETTE[0], "stroke-width": 2,
  }));

  for (const t of ticks(offsets[0], offsets[offsets.length - 1], 8)) {
    parts.push(text(x(t), plot.bottom + 16, String(t), { "text-anchor": "middle" }));
  }
  parts.push(text((plot.left + plot.right) / 2, height - 10,
                  "steps from CS onset", { "text-anchor": "middle" }));
  parts.push(...legend(["prediction", "return"], PALETTE,
                       plot.right + 16, plot.top + 8));
  return svgDocument(width, height, parts);
}

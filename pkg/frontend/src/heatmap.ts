import { Table, numeric, requireColumns } from "./csv.js";
import { aggregate, groupBy } from "./stats.js";
import { fmt, fmtCoord, svgDocument, tag, text } from "./svg.js";

// Named difficulty presets mirror the harness defaults.
const NAMED: Record<string, [number, number]> = {
  easy: [4, 5],
  medium: [8, 10],
  hard: [16, 20],
};

/** (#patterns, #distractors) from a patterning problem label such as
 * "noisy_patterning_p8_d10" or "noisy_patterning_medium". */
export function parsePatterning(problem: string): [number, number] {
  const explicit = problem.match(/_p(\d+)_d(\d+)/);
  if (explicit) return [Number(explicit[1]), Number(explicit[2])];
  for (const [name, pair] of Object.entries(NAMED)) {
    if (problem.endsWith(`_${name}`)) return pair;
  }
  throw new Error(
    `cannot read (patterns, distractors) from problem label: ${problem}`);
}

function shade(t: number): string {
  // white -> dark blue
  const lerp = (a: number, b: number) => Math.round(a + (b - a) * t);
  return `rgb(${lerp(255, 30)},${lerp(255, 60)},${lerp(255, 120)})`;
}

/** Mean-MSRE heatmap over (#patterns, #distractors) from runs.csv. */
export function renderHeatmap(table: Table): string {
  requireColumns(table, ["problem", "msre"]);
  const cells = new Map<string, number>();
  for (const [problem, rows] of groupBy(table.rows, r => r.problem)) {
    const [p, d] = parsePatterning(problem);
    cells.set(`${p},${d}`, aggregate(rows.map(r => numeric(r, "msre"))).mean);
  }
  const patterns = [...new Set([...cells.keys()].map(k => Number(k.split(",")[0])))]
    .sort((a, b) => a - b);
  const distractors = [...new Set([...cells.keys()].map(k => Number(k.split(",")[1])))]
    .sort((a, b) => a - b);

  const values = [...cells.values()];
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const cell = 64;
  const left = 90;
  const top = 40;
  const width = left + cell * distractors.length + 40;
  const height = top + cell * patterns.length + 60;
  const parts: string[] = [];

  patterns.forEach((p, i) => {
    distractors.forEach((d, j) => {
      const value = cells.get(`${p},${d}`);
      const x = left + j * cell;
      const y = top + i * cell;
      if (value === undefined) {
        parts.push(tag("rect", {
          class: "cell-missing", x, y, width: cell - 2, height: cell - 2,
          fill: "#eeeeee",
        }));
        return;
      }
      const t = hi > lo ? (value - lo) / (hi - lo) : 0.5;
      parts.push(tag("rect", {
        class: "cell", x, y, width: cell - 2, height: cell - 2,
        fill: shade(t),
      }));
      parts.push(text(x + cell / 2, y + cell / 2 + 4, fmt(value), {
        "text-anchor": "middle",
        fill: t > 0.55 ? "#ffffff" : "#111111",
      }));
    });
    parts.push(text(left - 8, top + i * cell + cell / 2 + 4, String(p),
                    { "text-anchor": "end" }));
  });
  distractors.forEach((d, j) => {
    parts.push(text(left + j * cell + cell / 2, top + cell * patterns.length + 18,
                    String(d), { "text-anchor": "middle" }));
  });
  parts.push(text(left - 56, top + (cell * patterns.length) / 2, "patterns", {
    "text-anchor": "middle",
    transform: `rotate(-90 ${left - 56} ${fmtCoord(top + (cell * patterns.length) / 2)})`,
  }));
  parts.push(text(left + (cell * distractors.length) / 2,
                  top + cell * patterns.length + 40, "distractors",
                  { "text-anchor": "middle" }));
  parts.push(text(left, top - 16, "mean MSRE"));
  return svgDocument(width, height, parts);
}

import { readFileSync, writeFileSync } from "node:fs";
import { parseArgs } from "node:util";

import { renderBars } from "./bars.js";
import { parseCsv } from "./csv.js";
import { renderHeatmap } from "./heatmap.js";
import { renderProfile } from "./profile.js";

const RENDERERS: Record<string, (table: ReturnType<typeof parseCsv>) => string> = {
  bars: renderBars,
  heatmap: renderHeatmap,
  profile: renderProfile,
};

export function run(argv: string[]): number {
  let args;
  try {
    args = parseArgs({
      args: argv,
      options: {
        kind: { type: "string" },
        in: { type: "string" },
        out: { type: "string" },
      },
    }).values;
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    return 2;
  }
  if (!args.kind || !args.in || !args.out) {
    console.error("usage: plot --kind <bars|heatmap|profile> --in <csv> --out <file>");
    return 2;
  }
  const render = RENDERERS[args.kind];
  if (!render) {
    console.error(`error: unknown kind: ${args.kind} `
      + `(expected ${Object.keys(RENDERERS).join(", ")})`);
    return 2;
  }
  try {
    const table = parseCsv(readFileSync(args.in, "utf8"));
    writeFileSync(args.out, render(table));
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    return 1;
  }
  console.log(`wrote ${args.out}`);
  return 0;
}

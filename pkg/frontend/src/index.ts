export { parseCsv, requireColumns, numeric } from "./csv.js";
export { aggregate, groupBy } from "./stats.js";
export { renderBars } from "./bars.js";
export { renderHeatmap, parsePatterning } from "./heatmap.js";
export { renderProfile } from "./profile.js";
export { run } from "./cli.js";

import { describe, expect, it } from "vitest";

import { numeric, parseCsv, requireColumns } from "../src/csv.js";

describe("parseCsv", () => {
  it("reads header and rows", () => {
    const table = parseCsv("a,b\n1,x\n2,y\n");
    expect(table.columns).toEqual(["a", "b"]);
    expect(table.rows).toEqual([
      { a: "1", b: "x" },
      { a: "2", b: "y" },
    ]);
  });

  it("rejects empty input", () => {
    expect(() => parseCsv("")).toThrow("empty CSV");
  });

  it("rejects a header with no data rows", () => {
    expect(() => parseCsv("a,b\n")).toThrow("empty CSV");
  });
});

describe("requireColumns", () => {
  it("names the missing column", () => {
    const table = parseCsv("a,b\n1,2\n");
    expect(() => requireColumns(table, ["a", "msre"])).toThrow(
      "missing column: msre");
    expect(() => requireColumns(table, ["a", "b"])).not.toThrow();
  });
});

describe("numeric", () => {
  it("parses numbers and rejects junk", () => {
    expect(numeric({ x: "0.25" }, "x")).toBe(0.25);
    expect(() => numeric({ x: "n/a" }, "x")).toThrow("column x");
  });
});

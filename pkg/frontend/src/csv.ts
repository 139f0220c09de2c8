import Papa from "papaparse";

export interface Table {
  columns: string[];
  rows: Record<string, string>[];
}

/** Parse CSV text into header + string records. Empty input is an error. */
export function parseCsv(text: string): Table {
  const trimmed = text.trim();
  if (trimmed === "") {
    throw new Error("empty CSV: no data rows");
  }
  const parsed = Papa.parse<Record<string, string>>(trimmed, {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new Error(`CSV parse error at row ${e.row}: ${e.message}`);
  }
  const columns = parsed.meta.fields ?? [];
  if (columns.length === 0 || parsed.data.length === 0) {
    throw new Error("empty CSV: no data rows");
  }
  return { columns, rows: parsed.data };
}

/** Throw an error naming the first required column the table lacks. */
export function requireColumns(table: Table, needed: string[]): void {
  for (const col of needed) {
    if (!table.columns.includes(col)) {
      throw new Error(`missing column: ${col}`);
    }
  }
}

export function numeric(row: Record<string, string>, col: string): number {
  const value = Number(row[col]);
  if (!Number.isFinite(value)) {
    throw new Error(`non-numeric value in column ${col}: ${row[col]}`);
  }
  return value;
}

import { readFileSync } from "node:fs";
import Papa from "papaparse";

export type Cell = string | number | boolean;
export type Row = Record<string, Cell>;

export interface Table {
  path: string;
  columns: string[];
  rows: Row[];
}

/** Read one artifact CSV and check it carries the columns a figure needs.
 *
 * The writers put a `# manifest: ...` comment on the first line and use
 * shortest-round-trip number formatting, so dynamic typing is safe.
 */
export function readTable(path: string, required: string[]): Table {
  const text = readFileSync(path, "utf8");
  const parsed = Papa.parse<Row>(text, {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: true,
    comments: "#",
  });
  const fatal = parsed.errors.filter((e) => e.code !== "TooFewFields");
  if (fatal.length > 0) {
    const first = fatal[0]!;
    throw new Error(`${path}: ${first.message} (row ${first.row})`);
  }
  const columns = (parsed.meta.fields ?? []).filter((c) => c !== "");
  const missing = required.filter((c) => !columns.includes(c));
  if (missing.length > 0) {
    throw new Error(
      `${path}: missing columns ${missing.join(", ")} (have ${columns.join(", ")})`,
    );
  }
  const rows = parsed.data.filter((r) => Object.keys(r).length > 0);
  if (rows.length === 0) {
    throw new Error(`${path}: no data rows`);
  }
  return { path, columns, rows };
}

/** Numeric cell access; figures fail loudly instead of plotting NaN. */
export function num(row: Row, column: string, path: string): number {
  const v = row[column];
  if (typeof v !== "number" || !Number.isFinite(v)) {
    throw new Error(`${path}: column ${column} has non-numeric cell ${String(v)}`);
  }
  return v;
}

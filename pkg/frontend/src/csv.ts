/**
 * Reader for the engine's CSV contract: `# key = value` metadata lines,
 * then a header row, then data rows. Values parse to numbers where
 * possible; everything else stays a string.
 */

import { readFileSync } from "node:fs";

export interface Table {
  metadata: Record<string, string>;
  columns: string[];
  rows: Record<string, number | string>[];
}

export class MissingColumnError extends Error {
  constructor(public column: string, public path: string) {
    super(`column "${column}" not present in ${path}`);
  }
}

export function parseCsv(text: string, path = "<memory>"): Table {
  const metadata: Record<string, string> = {};
  const lines = text.split(/\r?\n/).filter((ln) => ln.length > 0);
  let i = 0;
  for (; i < lines.length && lines[i].startsWith("#"); i++) {
    const body = lines[i].replace(/^#\s*/, "");
    const eq = body.indexOf("=");
    if (eq > 0) {
      metadata[body.slice(0, eq).trim()] = body.slice(eq + 1).trim();
    }
  }
  if (i >= lines.length) {
    throw new Error(`${path}: no header row after metadata`);
  }
  const columns = lines[i++].split(",");
  const rows: Record<string, number | string>[] = [];
  for (; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== columns.length) {
      throw new Error(
        `${path}: row ${i + 1} has ${cells.length} cells, expected ${columns.length}`,
      );
    }
    const row: Record<string, number | string> = {};
    columns.forEach((col, j) => {
      const raw = cells[j];
      const num = Number(raw);
      row[col] = raw !== "" && !Number.isNaN(num) ? num : raw;
    });
    rows.push(row);
  }
  return { metadata, columns, rows };
}

export function readCsv(path: string): Table {
  return parseCsv(readFileSync(path, "utf8"), path);
}

/** Assert every referenced column exists; name the first missing one. */
export function requireColumns(table: Table, cols: string[], path: string): void {
  for (const c of cols) {
    if (!table.columns.includes(c)) {
      throw new MissingColumnError(c, path);
    }
  }
}

/** Keep rows whose cells equal the filter values (numbers compared loosely). */
export function filterRows(
  table: Table,
  filter: Record<string, string | number> | undefined,
): Record<string, number | string>[] {
  if (!filter) return table.rows;
  return table.rows.filter((row) =>
    Object.entries(filter).every(([col, want]) => {
      const have = row[col];
      if (typeof want === "number" && typeof have === "number") {
        return Math.abs(have - want) <= 1e-12 * Math.max(1, Math.abs(want));
      }
      return String(have) === String(want);
    }),
  );
}

/** Distinct values of a column, in first-seen order. */
export function distinct(
  rows: Record<string, number | string>[],
  column: string,
): (number | string)[] {
  const seen: (number | string)[] = [];
  for (const row of rows) {
    if (!seen.includes(row[column])) seen.push(row[column]);
  }
  return seen;
}

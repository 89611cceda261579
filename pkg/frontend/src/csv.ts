/**
 * CSV reading and schema validation for the simulation outputs.
 *
 * The renderer performs no statistics: rows are surfaced verbatim, and the
 * numeric views returned here are parsed copies of cell strings whose
 * originals stay available for display.
 */

import * as fs from "fs";

export const REQUIRED_COLUMNS = [
  "study_id",
  "method",
  "score",
  "n",
  "m",
  "theta",
  "a",
  "b",
  "alpha",
  "n_rep",
  "coverage",
  "coverage_se",
  "mean_width",
  "mean_rel_width",
  "width_se",
  "runtime_ms",
] as const;

export type ColumnName = (typeof REQUIRED_COLUMNS)[number];

export class SchemaError extends Error {}

export interface Row {
  /** Verbatim cell strings keyed by column name. */
  cells: Record<ColumnName, string>;
}

export interface StudyTable {
  rows: Row[];
  /** Convenience numeric accessor (parsed from the verbatim cell). */
  num(row: Row, col: ColumnName): number;
}

export function parseCsv(text: string): StudyTable {
  const lines = text.split(/\r?\n/).filter((l) => l.trim() !== "");
  if (lines.length < 2) {
    throw new SchemaError("CSV needs a header and at least one data row");
  }
  const header = lines[0].split(",");
  for (const col of REQUIRED_COLUMNS) {
    if (!header.includes(col)) {
      throw new SchemaError(`missing required column '${col}'`);
    }
  }
  const idx = new Map(header.map((h, i) => [h, i]));
  const rows: Row[] = lines.slice(1).map((line, lineNo) => {
    const parts = line.split(",");
    if (parts.length !== header.length) {
      throw new SchemaError(`row ${lineNo + 2} has ${parts.length} cells, expected ${header.length}`);
    }
    const cells = {} as Record<ColumnName, string>;
    for (const col of REQUIRED_COLUMNS) {
      cells[col] = parts[idx.get(col)!];
    }
    return { cells };
  });
  return {
    rows,
    num(row: Row, col: ColumnName): number {
      const v = Number(row.cells[col]);
      if (!Number.isFinite(v)) {
        throw new SchemaError(`cell '${row.cells[col]}' in column '${col}' is not numeric`);
      }
      return v;
    },
  };
}

export function readCsv(path: string): StudyTable {
  return parseCsv(fs.readFileSync(path, "utf8"));
}

/** method:score label used on axes; bare method when the score is empty. */
export function methodLabel(row: Row): string {
  return row.cells.score === "" ? row.cells.method : `${row.cells.method}:${row.cells.score}`;
}

/** The single alpha shared by all rows (mixed-alpha tables are rejected). */
export function sharedAlpha(table: StudyTable): { text: string; value: number } {
  const alphas = new Set(table.rows.map((r) => r.cells.alpha));
  if (alphas.size !== 1) {
    throw new SchemaError(`expected one alpha per figure, found {${[...alphas].join(", ")}}`);
  }
  const text = table.rows[0].cells.alpha;
  return { text, value: Number(text) };
}

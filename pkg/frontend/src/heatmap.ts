/**
 * Prior-sweep heatmaps: baseline coverage, conformal coverage, and
 * conformal width over the (a, b) hyperparameter grid.
 *
 * Axis labels and cell annotations are verbatim CSV cells; colors are the
 * only derived quantity.
 */

import { fitText } from "./bars";
import { Row, sharedAlpha, SchemaError, StudyTable } from "./csv";
import { lerpColor, rect, render, svgDoc, text } from "./svg";

export interface HeatCell {
  a: string;
  b: string;
  valueText: string;
  value: number;
  color: string;
}

export interface HeatmapResult {
  name: string;
  title: string;
  svg: string;
  cells: HeatCell[];
}

const CELL = 52;
const MARGIN = { top: 48, right: 16, bottom: 40, left: 64 };

function uniqueSorted(values: string[]): string[] {
  return [...new Set(values)].sort((p, q) => Number(p) - Number(q));
}

function selectRows(table: StudyTable, method: string): Row[] {
  const rows = table.rows.filter((r) => r.cells.method === method);
  if (rows.length === 0) {
    throw new SchemaError(`no '${method}' rows in the sweep CSV`);
  }
  return rows;
}

function drawHeatmap(
  name: string,
  title: string,
  rows: Row[],
  table: StudyTable,
  column: "coverage" | "mean_rel_width",
  color: (v: number) => string
): HeatmapResult {
  const aVals = uniqueSorted(rows.map((r) => r.cells.a));
  const bVals = uniqueSorted(rows.map((r) => r.cells.b));
  const width = MARGIN.left + CELL * aVals.length + MARGIN.right;
  const height = MARGIN.top + CELL * bVals.length + MARGIN.bottom;
  const doc = svgDoc(width, height);
  text(doc, width / 2, 20, title, 'text-anchor="middle" font-size="13"');

  const cells: HeatCell[] = [];
  for (const row of rows) {
    const xi = aVals.indexOf(row.cells.a);
    const yi = bVals.indexOf(row.cells.b);
    const v = table.num(row, column);
    const x = MARGIN.left + xi * CELL;
    const y = MARGIN.top + yi * CELL;
    const fill = color(v);
    rect(doc, x, y, CELL, CELL, fill, 'stroke="#fff" stroke-width="1"');
    const valueText = row.cells[column]; // verbatim, squeezed not truncated
    text(doc, x + CELL / 2, y + CELL / 2 + 3, valueText,
      fitText(valueText, CELL - 6, 'text-anchor="middle" font-size="9"'));
    cells.push({ a: row.cells.a, b: row.cells.b, valueText, value: v, color: fill });
  }
  aVals.forEach((a, xi) => {
    text(doc, MARGIN.left + xi * CELL + CELL / 2, MARGIN.top + CELL * bVals.length + 14, a,
      'text-anchor="middle" font-size="10"');
  });
  bVals.forEach((b, yi) => {
    text(doc, MARGIN.left - 8, MARGIN.top + yi * CELL + CELL / 2 + 3, b,
      'text-anchor="end" font-size="10"');
  });
  text(doc, MARGIN.left + (CELL * aVals.length) / 2, height - 8, "prior a",
    'text-anchor="middle" font-size="11"');
  text(doc, 16, MARGIN.top + (CELL * bVals.length) / 2,
    "prior b", `text-anchor="middle" font-size="11" transform="rotate(-90 16 ${MARGIN.top + (CELL * bVals.length) / 2})"`);

  return { name, title, svg: render(doc), cells };
}

export function plotPriorHeatmaps(table: StudyTable): HeatmapResult[] {
  const alpha = sharedAlpha(table);
  const nominal = 1 - alpha.value;
  // coverage scale: red well below nominal, white at nominal, blue above
  const coverageColor = (v: number) => {
    if (v < nominal) {
      return lerpColor([255, 255, 255], [203, 67, 53], Math.min(1, (nominal - v) / 0.35));
    }
    return lerpColor([255, 255, 255], [46, 94, 140], Math.min(1, (v - nominal) / 0.1));
  };
  const widthColor = (v: number) => lerpColor([247, 251, 255], [8, 48, 107], v);

  const baseline = selectRows(table, "hppd");
  const conformal = selectRows(table, "analytic");
  return [
    drawHeatmap("hppd-coverage", `Baseline (HPPD) coverage, nominal ${nominal}`,
      baseline, table, "coverage", coverageColor),
    drawHeatmap("cp-coverage", `Conformal coverage, nominal ${nominal}`,
      conformal, table, "coverage", coverageColor),
    drawHeatmap("cp-width", "Conformal mean relative width",
      conformal, table, "mean_rel_width", widthColor),
  ];
}

import assert from "node:assert/strict";
import * as path from "node:path";
import { test } from "node:test";

import { parseCsv, readCsv, REQUIRED_COLUMNS } from "../src/csv";
import { plotPriorHeatmaps } from "../src/heatmap";

const DATA_DIR = path.resolve(__dirname, "..", "..", "..", "data");
const SWEEP = path.join(DATA_DIR, "sweep.csv");

const HEADER = REQUIRED_COLUMNS.join(",");

function sweepRow(method: string, a: string, b: string, coverage: string): string {
  const score = method === "analytic" ? "bres" : "";
  return [
    "xyz", method, score, "20", "20", "0.7", a, b, "0.1", "1000",
    coverage, "0.009", "8.1", "0.3857", "0.05", "0",
  ].join(",");
}

test("shipped sweep renders three figures", () => {
  const figs = plotPriorHeatmaps(readCsv(SWEEP));
  assert.deepEqual(
    figs.map((f) => f.name),
    ["hppd-coverage", "cp-coverage", "cp-width"]
  );
  for (const fig of figs) {
    assert.equal(fig.cells.length, 49);
    assert.ok(fig.svg.includes("<svg"));
  }
});

test("conformal coverage cells all clear nominal minus three standard errors", () => {
  const table = readCsv(SWEEP);
  const cpRows = table.rows.filter((r) => r.cells.method === "analytic");
  for (const row of cpRows) {
    const floor = 0.9 - 3 * table.num(row, "coverage_se");
    assert.ok(
      table.num(row, "coverage") >= floor,
      `cell (${row.cells.a}, ${row.cells.b}) covers ${row.cells.coverage} < ${floor}`
    );
  }
});

test("baseline heatmap shows undercovering cells on the shipped sweep", () => {
  const figs = plotPriorHeatmaps(readCsv(SWEEP));
  const baseline = figs[0];
  assert.ok(baseline.cells.some((c) => c.value < 0.872));
});

test("degenerate 1x1 grid renders a single cell", () => {
  const csv = `${HEADER}\n${sweepRow("hppd", "0.5", "0.5", "0.91")}\n${sweepRow(
    "analytic",
    "0.5",
    "0.5",
    "0.93"
  )}\n`;
  const figs = plotPriorHeatmaps(parseCsv(csv));
  for (const fig of figs) {
    assert.equal(fig.cells.length, 1);
  }
});

test("axes are labelled with the grid values from the CSV, not hardcoded", () => {
  const csv = `${HEADER}\n${sweepRow("hppd", "0.42", "3.14", "0.91")}\n${sweepRow(
    "analytic",
    "0.42",
    "3.14",
    "0.93"
  )}\n`;
  const figs = plotPriorHeatmaps(parseCsv(csv));
  assert.ok(figs[0].svg.includes(">0.42</text>"));
  assert.ok(figs[0].svg.includes(">3.14</text>"));
});

test("cell annotations are verbatim CSV coverage cells", () => {
  const table = readCsv(SWEEP);
  const figs = plotPriorHeatmaps(table);
  const hppdCells = new Set(
    table.rows.filter((r) => r.cells.method === "hppd").map((r) => r.cells.coverage)
  );
  for (const cell of figs[0].cells) {
    assert.ok(hppdCells.has(cell.valueText), `${cell.valueText} not a CSV cell`);
  }
});

test("missing method rows give a clean schema error", () => {
  const csv = `${HEADER}\n${sweepRow("hppd", "0.5", "0.5", "0.91")}\n`;
  assert.throws(() => plotPriorHeatmaps(parseCsv(csv)), /no 'analytic' rows/);
});

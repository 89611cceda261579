import assert from "node:assert/strict";
import * as fs from "node:fs";
import * as path from "node:path";
import { test } from "node:test";

import { plotCoverageWidth } from "../src/bars";
import { parseCsv, readCsv, REQUIRED_COLUMNS } from "../src/csv";

const DATA_DIR = path.resolve(__dirname, "..", "..", "..", "data");
const STUDY = path.join(DATA_DIR, "study.csv");

const HEADER = REQUIRED_COLUMNS.join(",");
const SINGLE = `${HEADER}
abc,analytic,bres,20,20,0.7,0.5,0.5,0.1,1000,0.929,0.0081,7.811,0.3719523,0.0466,0
`;

test("shipped study figure: every conformal bar sits at or above the nominal line", () => {
  const table = readCsv(STUDY);
  const result = plotCoverageWidth(table);
  assert.equal(result.nominal, 0.9);
  const cpBars = result.bars.filter((b) => b.label !== "hppd");
  assert.ok(cpBars.length >= 9);
  for (const bar of cpBars) {
    // SVG y grows downward: at-or-above the line means barTopY <= nominalY
    assert.ok(bar.barTopY <= bar.nominalY + 1e-9, `${bar.label} below nominal`);
  }
});

test("single-method table renders one bar without crashing", () => {
  const result = plotCoverageWidth(parseCsv(SINGLE));
  assert.equal(result.bars.length, 1);
  assert.ok(result.svg.includes("<svg"));
});

test("displayed values are verbatim CSV cells", () => {
  const table = readCsv(STUDY);
  const result = plotCoverageWidth(table);
  for (const row of table.rows) {
    assert.ok(result.svg.includes(`>${row.cells.coverage}</text>`),
      `coverage cell ${row.cells.coverage} missing from figure`);
    assert.ok(result.svg.includes(`>${row.cells.mean_rel_width}</text>`),
      `width cell ${row.cells.mean_rel_width} missing from figure`);
  }
});

test("nominal reference line is drawn dashed with its level labelled", () => {
  const result = plotCoverageWidth(readCsv(STUDY));
  assert.ok(result.svg.includes("stroke-dasharray"));
  assert.ok(result.svg.includes("nominal 0.9"));
});

test("se whiskers appear for every bar", () => {
  const table = readCsv(STUDY);
  const svg = plotCoverageWidth(table).svg;
  const whiskers = svg.match(/stroke-width="1\.5"/g) ?? [];
  // one whisker per row plus the nominal line
  assert.ok(whiskers.length >= table.rows.length);
});

/**
 * Two-panel study figure: empirical coverage per method with the nominal
 * reference line and +-1 SE whiskers, next to relative width per method.
 *
 * Every number printed on the figure is a verbatim CSV cell; the only
 * arithmetic here is pixel placement.
 */

import { methodLabel, Row, sharedAlpha, StudyTable } from "./csv";
import { line, rect, render, svgDoc, text } from "./svg";

export interface BarGeometry {
  label: string;
  coverage: number;
  coverageText: string;
  barTopY: number;
  nominalY: number;
}

export interface BarsResult {
  svg: string;
  nominal: number;
  bars: BarGeometry[];
}

const PANEL_W = 420;
const PANEL_H = 300;
const MARGIN = { top: 36, right: 16, bottom: 88, left: 52 };
const GAP = 48;

export function plotCoverageWidth(table: StudyTable): BarsResult {
  const alpha = sharedAlpha(table);
  const nominal = 1 - alpha.value;
  const rows = table.rows;

  const width = 2 * PANEL_W + GAP + MARGIN.left + MARGIN.right;
  const height = PANEL_H + MARGIN.top + MARGIN.bottom;
  const doc = svgDoc(width, height);

  const covScale = (v: number) => MARGIN.top + PANEL_H * (1 - v); // coverage axis is 0..1
  const geoms: BarGeometry[] = [];

  // panel 1: coverage
  drawPanel(doc, MARGIN.left, "Empirical coverage");
  const nominalY = covScale(nominal);
  rows.forEach((row, i) => {
    const { x, w } = slot(MARGIN.left, rows.length, i);
    const cov = table.num(row, "coverage");
    const se = table.num(row, "coverage_se");
    const y = covScale(cov);
    rect(doc, x, y, w, covScale(0) - y, barColor(row));
    line(doc, x + w / 2, covScale(cov + se), x + w / 2, covScale(cov - se), "#333", 'stroke-width="1.5"');
    text(doc, x + w / 2, y - 4, row.cells.coverage, 'text-anchor="middle" font-size="9"');
    tickLabel(doc, x + w / 2, covScale(0) + 10, methodLabel(row));
    geoms.push({
      label: methodLabel(row),
      coverage: cov,
      coverageText: row.cells.coverage,
      barTopY: y,
      nominalY,
    });
  });
  line(
    doc,
    MARGIN.left,
    nominalY,
    MARGIN.left + PANEL_W,
    nominalY,
    "#cc0000",
    'stroke-dasharray="6,4" stroke-width="1.5"'
  );
  text(doc, MARGIN.left + PANEL_W - 2, nominalY - 5, `nominal ${fmtNominal(alpha.text)}`,
    'text-anchor="end" fill="#cc0000" font-size="10"');
  axisTicks(doc, MARGIN.left, covScale, [0, 0.25, 0.5, 0.75, 1.0]);

  // panel 2: relative width
  const x0 = MARGIN.left + PANEL_W + GAP;
  drawPanel(doc, x0, "Mean relative width");
  rows.forEach((row, i) => {
    const { x, w } = slot(x0, rows.length, i);
    const relw = table.num(row, "mean_rel_width");
    const y = covScale(relw); // relative width shares the 0..1 scale
    rect(doc, x, y, w, covScale(0) - y, barColor(row));
    // verbatim cell, squeezed to the bar slot rather than truncated
    text(doc, x + w / 2, y - 4, row.cells.mean_rel_width,
      fitText(row.cells.mean_rel_width, w + 8, 'text-anchor="middle" font-size="9"'));
    tickLabel(doc, x + w / 2, covScale(0) + 10, methodLabel(row));
  });
  axisTicks(doc, x0, covScale, [0, 0.25, 0.5, 0.75, 1.0]);

  return { svg: render(doc), nominal, bars: geoms };
}

function drawPanel(doc: ReturnType<typeof svgDoc>, x0: number, title: string): void {
  rect(doc, x0, MARGIN.top, PANEL_W, PANEL_H, "none", 'stroke="#888" stroke-width="1"');
  text(doc, x0 + PANEL_W / 2, MARGIN.top - 10, title, 'text-anchor="middle" font-size="13"');
}

function slot(x0: number, count: number, i: number): { x: number; w: number } {
  const cell = PANEL_W / count;
  return { x: x0 + cell * i + cell * 0.15, w: cell * 0.7 };
}

function barColor(row: Row): string {
  switch (row.cells.method) {
    case "full":
      return "#4878a8";
    case "analytic":
      return "#2f5f8f";
    case "split":
      return "#72a874";
    default:
      return "#b0b0b0"; // baseline
  }
}

function tickLabel(doc: ReturnType<typeof svgDoc>, x: number, y: number, label: string): void {
  text(doc, x, y, label, `text-anchor="end" font-size="9" transform="rotate(-45 ${x} ${y})"`);
}

function axisTicks(
  doc: ReturnType<typeof svgDoc>,
  x0: number,
  scale: (v: number) => number,
  ticks: number[]
): void {
  for (const t of ticks) {
    const y = scale(t);
    line(doc, x0 - 4, y, x0, y, "#333");
    text(doc, x0 - 6, y + 3, t.toFixed(2), 'text-anchor="end" font-size="9"');
  }
}

function fmtNominal(alphaText: string): string {
  // display 1 - alpha without introducing new precision
  const v = 1 - Number(alphaText);
  return String(Math.round(v * 1e6) / 1e6);
}

/** Compress long value strings into the slot width without altering them. */
export function fitText(content: string, maxWidth: number, extra: string): string {
  const approxWidth = content.length * 5.6; // ~width of a 9px digit
  if (approxWidth <= maxWidth) {
    return extra;
  }
  return `${extra} textLength="${Math.round(maxWidth)}" lengthAdjust="spacingAndGlyphs"`;
}

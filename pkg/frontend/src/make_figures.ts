#!/usr/bin/env node
/**
 * make_figures <csv> --kind {bars,heatmap} --out <path>
 *
 * bars:    one SVG (coverage + relative width panels) at --out.
 * heatmap: three SVGs (baseline coverage, conformal coverage, conformal
 *          width); --out is used as a stem, e.g. figs/sweep.svg becomes
 *          figs/sweep-hppd-coverage.svg etc.
 */

import * as fs from "fs";
import * as path from "path";

import { plotCoverageWidth } from "./bars";
import { readCsv, SchemaError } from "./csv";
import { plotPriorHeatmaps } from "./heatmap";

interface Args {
  csv: string;
  kind: "bars" | "heatmap";
  out: string;
}

export function parseArgs(argv: string[]): Args {
  const positional: string[] = [];
  let kind = "";
  let out = "";
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--kind") {
      kind = argv[++i] ?? "";
    } else if (arg === "--out") {
      out = argv[++i] ?? "";
    } else if (arg.startsWith("--")) {
      throw new Error(`unknown flag ${arg}`);
    } else {
      positional.push(arg);
    }
  }
  if (positional.length !== 1 || (kind !== "bars" && kind !== "heatmap") || out === "") {
    throw new Error("usage: make_figures <csv> --kind {bars,heatmap} --out <path>");
  }
  return { csv: positional[0], kind, out };
}

export function stemmedName(out: string, suffix: string): string {
  const ext = path.extname(out) || ".svg";
  const base = out.slice(0, out.length - (path.extname(out) ? ext.length : 0));
  return `${base}-${suffix}${ext}`;
}

export function run(args: Args): string[] {
  const table = readCsv(args.csv);
  const written: string[] = [];
  fs.mkdirSync(path.dirname(path.resolve(args.out)), { recursive: true });
  if (args.kind === "bars") {
    const result = plotCoverageWidth(table);
    fs.writeFileSync(args.out, result.svg);
    written.push(args.out);
  } else {
    for (const fig of plotPriorHeatmaps(table)) {
      const file = stemmedName(args.out, fig.name);
      fs.writeFileSync(file, fig.svg);
      written.push(file);
    }
  }
  return written;
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 2;
  }
  try {
    for (const file of run(args)) {
      console.log(file);
    }
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 1;
    }
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}

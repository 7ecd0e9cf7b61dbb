/** CLI: render holofit bestterm figures from results.csv + meta.json. */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { pathToFileURL } from "node:url";

import { loadBestterm, SchemaError } from "./csv.js";
import { renderGrid, renderSingle } from "./svg.js";

interface Args {
  input: string;
  meta: string;
  out: string;
}

export function parseArgs(argv: string[]): Args {
  const args: Partial<Args> = {};
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (value === undefined) throw new Error(`missing value for ${flag}`);
    if (flag === "--in") args.input = value;
    else if (flag === "--meta") args.meta = value;
    else if (flag === "--out") args.out = value;
    else throw new Error(`unknown flag ${flag}`);
    i++;
  }
  if (!args.input || !args.meta || !args.out) {
    throw new Error("usage: render --in results.csv --meta meta.json --out <dir>");
  }
  return args as Args;
}

/** Render all figures; returns the list of files written. */
export function renderFigures(input: string, meta: string, outDir: string): string[] {
  const data = loadBestterm(readFileSync(input, "utf-8"), readFileSync(meta, "utf-8"));
  mkdirSync(outDir, { recursive: true });
  const written: string[] = [];
  const panels = data.dims.map((d) => ({
    d,
    rows: data.rows.filter((r) => r.d === d),
  }));
  for (const panel of panels) {
    const file = join(outDir, `bestterm_d${panel.d}.svg`);
    writeFileSync(file, renderSingle(panel));
    written.push(file);
  }
  const grid = join(outDir, "fig_rates.svg");
  writeFileSync(grid, renderGrid(panels));
  written.push(grid);
  return written;
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  try {
    const files = renderFigures(args.input, args.meta, args.out);
    for (const f of files) console.log(f);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
    } else {
      console.error(`error: ${(err as Error).message}`);
    }
    return 2;
  }
}

if (import.meta.url === pathToFileURL(process.argv[1] ?? "").href) {
  process.exit(main(process.argv.slice(2)));
}

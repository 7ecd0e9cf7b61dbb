import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { BESTTERM_COLUMNS, SchemaError, loadBestterm, parseCsv } from "../src/csv.js";

const FIXTURES = join(__dirname, "fixtures");
const csvText = readFileSync(join(FIXTURES, "results.csv"), "utf-8");
const metaText = readFileSync(join(FIXTURES, "meta.json"), "utf-8");

describe("parseCsv", () => {
  it("splits rows and fields", () => {
    expect(parseCsv("a,b\n1,2\n")).toEqual([
      ["a", "b"],
      ["1", "2"],
    ]);
  });

  it("handles quoted fields with commas and escaped quotes", () => {
    expect(parseCsv('a,"b,c"\n"x""y",z\n')).toEqual([
      ["a", "b,c"],
      ['x"y', "z"],
    ]);
  });

  it("tolerates a missing trailing newline", () => {
    expect(parseCsv("a,b\n1,2")).toEqual([
      ["a", "b"],
      ["1", "2"],
    ]);
  });
});

describe("loadBestterm", () => {
  it("loads the fixture produced by the benchmark CLI", () => {
    const data = loadBestterm(csvText, metaText);
    expect(data.dims).toEqual([4, 8, 16, 32]);
    expect(data.rows.length).toBe(4 * 61);
    const first = data.rows[0];
    expect(first.s).toBe(0);
    expect(first.sigma).toBeCloseTo(1.0, 6);
  });

  it("rejects an empty csv", () => {
    expect(() => loadBestterm("", metaText)).toThrow(SchemaError);
  });

  it("rejects a header-only csv", () => {
    const header = csvText.split("\n")[0] + "\n";
    expect(() => loadBestterm(header, metaText)).toThrow(/no data rows/);
  });

  it("rejects reordered columns", () => {
    const lines = csvText.split("\n");
    const cols = lines[0].split(",");
    [cols[0], cols[1]] = [cols[1], cols[0]];
    const swapped = [cols.join(","), ...lines.slice(1)].join("\n");
    expect(() => loadBestterm(swapped, metaText)).toThrow(/column mismatch/);
  });

  it("rejects a renamed column", () => {
    const mangled = csvText.replace("sigma_s", "sigma");
    expect(() => loadBestterm(mangled, metaText)).toThrow(/column mismatch/);
  });

  it("rejects a wrong schema version", () => {
    const meta = JSON.parse(metaText);
    meta.schema_version = 99;
    expect(() => loadBestterm(csvText, JSON.stringify(meta))).toThrow(/schema_version/);
  });

  it("rejects a different experiment", () => {
    const meta = JSON.parse(metaText);
    meta.experiment = "learn";
    expect(() => loadBestterm(csvText, JSON.stringify(meta))).toThrow(/expected bestterm/);
  });

  it("rejects non-numeric cells", () => {
    const broken = csvText.replace(/^bestterm,4,0,[^,]+/m, "bestterm,4,0,oops");
    expect(() => loadBestterm(broken, metaText)).toThrow(/not numeric/);
  });

  it("pins the exact column order", () => {
    expect(csvText.split(/\r?\n/)[0]).toBe(BESTTERM_COLUMNS.join(","));
  });
});

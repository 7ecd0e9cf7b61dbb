/** Parsing and schema validation for holofit bestterm benchmark output. */

export const SCHEMA_VERSION = 1;

export const BESTTERM_COLUMNS = [
  "experiment",
  "d",
  "s",
  "sigma_s",
  "alg_ref",
  "exp_ref",
  "floor",
  "build_id",
  "seed",
  "config_digest",
] as const;

export class SchemaError extends Error {}

export interface BesttermRow {
  d: number;
  s: number;
  sigma: number;
  algRef: number;
  expRef: number;
  floor: number;
}

export interface BesttermData {
  rows: BesttermRow[];
  meta: Record<string, unknown>;
  dims: number[];
}

/** Minimal CSV split with double-quote support (RFC-4180 style). */
export function parseCsv(text: string): string[][] {
  const rows: string[][] = [];
  let field = "";
  let row: string[] = [];
  let inQuotes = false;
  for (let i = 0; i < text.length; i++) {
    const c = text[i];
    if (inQuotes) {
      if (c === '"') {
        if (text[i + 1] === '"') {
          field += '"';
          i++;
        } else {
          inQuotes = false;
        }
      } else {
        field += c;
      }
    } else if (c === '"') {
      inQuotes = true;
    } else if (c === ",") {
      row.push(field);
      field = "";
    } else if (c === "\n" || c === "\r") {
      if (c === "\r" && text[i + 1] === "\n") i++;
      row.push(field);
      field = "";
      if (row.length > 1 || row[0] !== "") rows.push(row);
      row = [];
    } else {
      field += c;
    }
  }
  if (field !== "" || row.length > 0) {
    row.push(field);
    if (row.length > 1 || row[0] !== "") rows.push(row);
  }
  return rows;
}

function numeric(value: string, column: string, line: number): number {
  const v = Number(value);
  if (!Number.isFinite(v)) {
    throw new SchemaError(`line ${line}: column ${column} is not numeric: ${JSON.stringify(value)}`);
  }
  return v;
}

/** Validate the meta record and CSV header/body of a bestterm run. */
export function loadBestterm(csvText: string, metaText: string): BesttermData {
  let meta: Record<string, unknown>;
  try {
    meta = JSON.parse(metaText);
  } catch (err) {
    throw new SchemaError(`meta.json is not valid JSON: ${(err as Error).message}`);
  }
  if (meta["schema_version"] !== SCHEMA_VERSION) {
    throw new SchemaError(
      `meta schema_version ${String(meta["schema_version"])} does not match ${SCHEMA_VERSION}`,
    );
  }
  if (meta["experiment"] !== "bestterm") {
    throw new SchemaError(`meta experiment is ${String(meta["experiment"])}, expected bestterm`);
  }
  const parsed = parseCsv(csvText);
  if (parsed.length === 0) {
    throw new SchemaError("results.csv is empty");
  }
  const header = parsed[0];
  const expected: string[] = [...BESTTERM_COLUMNS];
  if (header.length !== expected.length || header.some((h, i) => h !== expected[i])) {
    throw new SchemaError(
      `column mismatch: got [${header.join(", ")}], expected [${expected.join(", ")}]`,
    );
  }
  if (parsed.length === 1) {
    throw new SchemaError("results.csv has a header but no data rows");
  }
  const col = (name: string) => expected.indexOf(name);
  const rows: BesttermRow[] = [];
  for (let i = 1; i < parsed.length; i++) {
    const r = parsed[i];
    if (r.length !== expected.length) {
      throw new SchemaError(`line ${i + 1}: expected ${expected.length} fields, got ${r.length}`);
    }
    if (r[col("experiment")] !== "bestterm") {
      throw new SchemaError(`line ${i + 1}: experiment column is ${r[col("experiment")]}`);
    }
    rows.push({
      d: numeric(r[col("d")], "d", i + 1),
      s: numeric(r[col("s")], "s", i + 1),
      sigma: numeric(r[col("sigma_s")], "sigma_s", i + 1),
      algRef: numeric(r[col("alg_ref")], "alg_ref", i + 1),
      expRef: numeric(r[col("exp_ref")], "exp_ref", i + 1),
      floor: numeric(r[col("floor")], "floor", i + 1),
    });
  }
  const dims = [...new Set(rows.map((r) => r.d))].sort((a, b) => a - b);
  return { rows, meta, dims };
}

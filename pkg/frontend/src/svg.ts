/** Hand-rolled deterministic SVG log-log charts (no DOM, no canvas). */

import type { BesttermRow } from "./csv.js";

export const PANEL_W = 340;
export const PANEL_H = 280;
const MARGIN = { left: 52, right: 10, top: 26, bottom: 38 };

const SERIES = [
  { key: "sigma", label: "best s-term", color: "#111111", dash: "" },
  { key: "algRef", label: "alg. rate", color: "#1f6fb2", dash: "6,3" },
  { key: "expRef", label: "exp. rate", color: "#c23b22", dash: "2,3" },
] as const;

const fmt = (v: number): string => {
  if (!Number.isFinite(v)) return "0";
  return Number(v.toPrecision(6)).toString();
};

function log10(v: number): number {
  return Math.log(v) / Math.LN10;
}

function tickLabel(exp: number): string {
  return `1e${exp}`;
}

export interface Panel {
  d: number;
  rows: BesttermRow[];
}

/**
 * Render one panel as a positioned <g> group.
 *
 * Both axes are logarithmic; rows at s = 0 or with non-positive values are
 * skipped (they have no log-log representation).  The truncation floor is
 * drawn as a horizontal guide so floor-dominated tails are visible.
 */
export function panelGroup(panel: Panel, ox: number, oy: number): string {
  const rows = panel.rows
    .filter((r) => r.s > 0 && r.sigma > 0)
    .sort((a, b) => a.s - b.s);
  if (rows.length === 0) {
    throw new Error(`no plottable rows for d = ${panel.d}`);
  }
  const floor = rows[0].floor;
  const xs = rows.map((r) => r.s);
  const positives: number[] = [];
  for (const r of rows) {
    positives.push(r.sigma);
    if (r.algRef > 0) positives.push(r.algRef);
    if (r.expRef > 0) positives.push(r.expRef);
  }
  if (floor > 0) positives.push(floor);
  const xLo = log10(Math.min(...xs));
  const xHi = log10(Math.max(...xs));
  let yLo = log10(Math.min(...positives));
  let yHi = log10(Math.max(...positives));
  if (yHi - yLo < 1e-9) {
    yLo -= 1;
    yHi += 1;
  }
  const plotW = PANEL_W - MARGIN.left - MARGIN.right;
  const plotH = PANEL_H - MARGIN.top - MARGIN.bottom;
  const X = (s: number) => MARGIN.left + ((log10(s) - xLo) / (xHi - xLo || 1)) * plotW;
  const Y = (v: number) => MARGIN.top + (1 - (log10(v) - yLo) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(`<g transform="translate(${fmt(ox)},${fmt(oy)})">`);
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${fmt(plotW)}" height="${fmt(plotH)}" fill="none" stroke="#333" stroke-width="1"/>`,
  );
  parts.push(
    `<text x="${fmt(MARGIN.left + plotW / 2)}" y="16" text-anchor="middle" font-size="13" font-family="sans-serif">d = ${panel.d}</text>`,
  );
  // decade ticks
  for (let e = Math.ceil(xLo); e <= Math.floor(xHi) + 1e-9; e++) {
    const x = X(10 ** e);
    parts.push(
      `<line x1="${fmt(x)}" y1="${fmt(MARGIN.top + plotH)}" x2="${fmt(x)}" y2="${fmt(MARGIN.top + plotH + 4)}" stroke="#333"/>`,
      `<text x="${fmt(x)}" y="${fmt(MARGIN.top + plotH + 16)}" text-anchor="middle" font-size="10" font-family="sans-serif">${tickLabel(e)}</text>`,
    );
  }
  for (let e = Math.ceil(yLo); e <= Math.floor(yHi) + 1e-9; e++) {
    const y = Y(10 ** e);
    parts.push(
      `<line x1="${fmt(MARGIN.left - 4)}" y1="${fmt(y)}" x2="${fmt(MARGIN.left)}" y2="${fmt(y)}" stroke="#333"/>`,
      `<text x="${fmt(MARGIN.left - 6)}" y="${fmt(y + 3)}" text-anchor="end" font-size="10" font-family="sans-serif">${tickLabel(e)}</text>`,
    );
  }
  parts.push(
    `<text x="${fmt(MARGIN.left + plotW / 2)}" y="${fmt(PANEL_H - 6)}" text-anchor="middle" font-size="11" font-family="sans-serif">s</text>`,
  );
  // floor guide
  if (floor > 0 && log10(floor) >= yLo) {
    const y = Y(floor);
    parts.push(
      `<line x1="${fmt(MARGIN.left)}" y1="${fmt(y)}" x2="${fmt(MARGIN.left + plotW)}" y2="${fmt(y)}" stroke="#999" stroke-dasharray="1,2"/>`,
    );
  }
  // series paths
  for (const spec of SERIES) {
    const pts = rows
      .map((r) => ({ s: r.s, v: r[spec.key as "sigma" | "algRef" | "expRef"] }))
      .filter((p) => p.v > 0 && log10(p.v) >= yLo - 1e-9);
    if (pts.length === 0) continue;
    const path = pts
      .map((p, i) => `${i === 0 ? "M" : "L"}${fmt(X(p.s))},${fmt(Y(p.v))}`)
      .join(" ");
    const dash = spec.dash ? ` stroke-dasharray="${spec.dash}"` : "";
    parts.push(`<path d="${path}" fill="none" stroke="${spec.color}" stroke-width="1.4"${dash}/>`);
  }
  // legend
  const lx = MARGIN.left + plotW - 92;
  let ly = MARGIN.top + 8;
  const legend: { label: string; color: string; dash: string }[] = SERIES.map((s) => ({
    label: s.label,
    color: s.color,
    dash: s.dash,
  }));
  if (floor > 0) legend.push({ label: "trunc. floor", color: "#999", dash: "1,2" });
  for (const item of legend) {
    const dash = item.dash ? ` stroke-dasharray="${item.dash}"` : "";
    parts.push(
      `<line x1="${fmt(lx)}" y1="${fmt(ly)}" x2="${fmt(lx + 18)}" y2="${fmt(ly)}" stroke="${item.color}" stroke-width="1.4"${dash}/>`,
      `<text x="${fmt(lx + 22)}" y="${fmt(ly + 3)}" font-size="9" font-family="sans-serif">${item.label}</text>`,
    );
    ly += 12;
  }
  parts.push("</g>");
  return parts.join("\n");
}

function svgDocument(width: number, height: number, body: string): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    body,
    "</svg>",
    "",
  ].join("\n");
}

/** Standalone figure for one dimension. */
export function renderSingle(panel: Panel): string {
  return svgDocument(PANEL_W, PANEL_H, panelGroup(panel, 0, 0));
}

/** The combined layout: panels in a two-column grid (2x2 for four dims). */
export function renderGrid(panels: Panel[]): string {
  const cols = 2;
  const rowsN = Math.ceil(panels.length / cols);
  const body = panels
    .map((p, i) => panelGroup(p, (i % cols) * PANEL_W, Math.floor(i / cols) * PANEL_H))
    .join("\n");
  return svgDocument(cols * PANEL_W, rowsN * PANEL_H, body);
}

/** Parsers for the primary pipeline's file contracts. Statistics are read as-is,
 * never recomputed here. */

import { readFileSync } from "node:fs";

export const MAP_HEADER = "x,y,gain_db";
export const CURVES_HEADER = "round,val_mse_db2";
export const BOX_HEADER = "stat,value";
export const ASSOC_HEADER = "rank,ap_index,score_db";

export function checkHeader(actual: string, expected: string, path: string): void {
  if (actual === expected) return;
  const got = actual.split(",");
  const want = expected.split(",");
  for (let i = 0; i < Math.max(got.length, want.length); i++) {
    if (got[i] !== want[i]) {
      throw new Error(
        `${path}: header mismatch at column ${i + 1}: ` +
        `expected "${want[i] ?? "(none)"}", got "${got[i] ?? "(none)"}"`);
    }
  }
  throw new Error(`${path}: header mismatch: expected "${expected}", got "${actual}"`);
}

function readRows(path: string, expectedHeader: string): string[][] {
  const text = readFileSync(path, "utf8");
  const lines = text.split(/\r?\n/).filter((ln) => ln.length > 0);
  if (lines.length === 0) {
    throw new Error(`${path}: empty file`);
  }
  checkHeader(lines[0], expectedHeader, path);
  return lines.slice(1).map((ln) => ln.split(","));
}

function toNumber(token: string, path: string, what: string): number {
  const v = Number(token);
  if (!Number.isFinite(v)) {
    throw new Error(`${path}: ${what} is not a finite number: "${token}"`);
  }
  return v;
}

export interface GainGrid {
  xs: number[];
  ys: number[];
  /** values[yi][xi], same orientation as the primary's row-major map CSV */
  values: number[][];
  min: number;
  max: number;
}

export function parseMapCsv(path: string): GainGrid {
  const rows = readRows(path, MAP_HEADER);
  if (rows.length === 0) {
    throw new Error(`${path}: map has no cells`);
  }
  const xsSet = new Set<number>();
  const ysSet = new Set<number>();
  const cells: Array<[number, number, number]> = rows.map((r, i) => {
    if (r.length !== 3) {
      throw new Error(`${path}: row ${i + 2} has ${r.length} columns, expected 3`);
    }
    const x = toNumber(r[0], path, `row ${i + 2} x`);
    const y = toNumber(r[1], path, `row ${i + 2} y`);
    const g = toNumber(r[2], path, `row ${i + 2} gain_db`);
    xsSet.add(x);
    ysSet.add(y);
    return [x, y, g];
  });
  const xs = [...xsSet].sort((a, b) => a - b);
  const ys = [...ysSet].sort((a, b) => a - b);
  const xIndex = new Map(xs.map((v, i) => [v, i]));
  const yIndex = new Map(ys.map((v, i) => [v, i]));
  const values = ys.map(() => new Array<number>(xs.length).fill(NaN));
  let min = Infinity;
  let max = -Infinity;
  for (const [x, y, g] of cells) {
    values[yIndex.get(y)!][xIndex.get(x)!] = g;
    if (g < min) min = g;
    if (g > max) max = g;
  }
  return { xs, ys, values, min, max };
}

export interface Curve {
  rounds: number[];
  mse: number[];
}

export function parseCurvesCsv(path: string): Curve {
  const rows = readRows(path, CURVES_HEADER);
  if (rows.length === 0) {
    throw new Error(`${path}: curve has no points`);
  }
  const rounds: number[] = [];
  const mse: number[] = [];
  rows.forEach((r, i) => {
    if (r.length !== 2) {
      throw new Error(`${path}: row ${i + 2} has ${r.length} columns, expected 2`);
    }
    rounds.push(toNumber(r[0], path, `row ${i + 2} round`));
    mse.push(toNumber(r[1], path, `row ${i + 2} val_mse_db2`));
  });
  return { rounds, mse };
}

export interface BoxStats {
  median: number;
  q1: number;
  q3: number;
  iqr: number;
  lowerFence: number;
  upperFence: number;
  outliers: number[];
  /** raw value strings by stat name, for byte-for-byte provenance checks */
  raw: Record<string, string>;
}

export function parseBoxStatsCsv(path: string): BoxStats {
  const rows = readRows(path, BOX_HEADER);
  const raw: Record<string, string> = {};
  const outliers: number[] = [];
  for (const r of rows) {
    if (r.length !== 2) {
      throw new Error(`${path}: malformed stat row "${r.join(",")}"`);
    }
    if (r[0] === "outlier") {
      outliers.push(toNumber(r[1], path, "outlier"));
    } else {
      raw[r[0]] = r[1];
    }
  }
  for (const key of ["median", "q1", "q3", "iqr", "lower_fence", "upper_fence"]) {
    if (!(key in raw)) {
      throw new Error(`${path}: missing stat "${key}"`);
    }
  }
  return {
    median: toNumber(raw["median"], path, "median"),
    q1: toNumber(raw["q1"], path, "q1"),
    q3: toNumber(raw["q3"], path, "q3"),
    iqr: toNumber(raw["iqr"], path, "iqr"),
    lowerFence: toNumber(raw["lower_fence"], path, "lower_fence"),
    upperFence: toNumber(raw["upper_fence"], path, "upper_fence"),
    outliers,
    raw,
  };
}

export interface Association {
  rank: number;
  apIndex: number;
  score: number;
}

export function parseAssocCsv(path: string): Association[] {
  return readRows(path, ASSOC_HEADER).map((r, i) => {
    if (r.length !== 3) {
      throw new Error(`${path}: row ${i + 2} has ${r.length} columns, expected 3`);
    }
    return {
      rank: toNumber(r[0], path, `row ${i + 2} rank`),
      apIndex: toNumber(r[1], path, `row ${i + 2} ap_index`),
      score: toNumber(r[2], path, `row ${i + 2} score_db`),
    };
  });
}

export interface SceneFile {
  roi: { width: number; height: number };
  obstacles: Array<{ x_min: number; y_min: number; x_max: number; y_max: number }>;
  aps: Array<[number, number]>;
}

export function parseEnvJson(path: string): SceneFile {
  const data = JSON.parse(readFileSync(path, "utf8"));
  if (!data.roi || !Array.isArray(data.obstacles) || !Array.isArray(data.aps)) {
    throw new Error(`${path}: not an environment file (needs roi, obstacles, aps)`);
  }
  return data as SceneFile;
}

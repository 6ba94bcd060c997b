/** Figure builders: gain-map heatmap panels, validation-loss curves, MAE boxplots.
 * All statistics come straight from the input files; nothing is recomputed. */

import { basename } from "node:path";

import {
  BLACK, Canvas, GRAY, heatColor, LIGHT_GRAY, Rgb, SERIES_COLORS, WHITE,
} from "./canvas.js";
import {
  Association, BoxStats, Curve, GainGrid, parseAssocCsv, parseBoxStatsCsv,
  parseCurvesCsv, parseMapCsv, parseEnvJson, SceneFile,
} from "./csv.js";

const MARGIN = 40;
const TITLE_H = 16;

export function fileStem(path: string): string {
  return basename(path).replace(/\.[^.]*$/, "");
}

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 10000 || a < 0.01) return v.toExponential(1).replace("e", "E");
  const s = v.toPrecision(3);
  return s.includes(".") ? s.replace(/\.?0+$/, "") : s;
}

interface Scale {
  lo: number;
  hi: number;
  px0: number;
  px1: number;
}

function scalePos(s: Scale, v: number): number {
  if (s.hi === s.lo) return (s.px0 + s.px1) / 2;
  return s.px0 + ((v - s.lo) / (s.hi - s.lo)) * (s.px1 - s.px0);
}

// ---------------------------------------------------------------------------
// Heatmap
// ---------------------------------------------------------------------------

export interface HeatmapModel {
  kind: "heatmap";
  labels: string[];
  vmin: number;
  vmax: number;
  grids: GainGrid[];
  scene?: SceneFile;
  associations?: Association[];
}

export function buildHeatmap(
  inputs: string[],
  envPath?: string,
  assocPath?: string,
  ue?: [number, number],
  panelSize = 360,
): { canvas: Canvas; model: HeatmapModel } {
  if (inputs.length === 0) throw new Error("heatmap needs at least one map CSV");
  const grids = inputs.map(parseMapCsv);
  const labels = inputs.map(fileStem);
  const scene = envPath ? parseEnvJson(envPath) : undefined;
  const associations = assocPath ? parseAssocCsv(assocPath) : undefined;

  // one shared color scale across panels, so maps are directly comparable
  const vmin = Math.min(...grids.map((g) => g.min));
  const vmax = Math.max(...grids.map((g) => g.max));

  const barW = 56;
  const width = MARGIN + inputs.length * (panelSize + 16) + barW + MARGIN;
  const height = MARGIN + TITLE_H + panelSize + MARGIN;
  const canvas = new Canvas(width, height);

  grids.forEach((grid, p) => {
    const px = MARGIN + p * (panelSize + 16);
    const py = MARGIN + TITLE_H;
    canvas.drawText(px, MARGIN + 3, labels[p], BLACK);

    const extentW = scene ? scene.roi.width : grid.xs[grid.xs.length - 1] + grid.xs[0];
    const extentH = scene ? scene.roi.height : grid.ys[grid.ys.length - 1] + grid.ys[0];
    const sx: Scale = { lo: 0, hi: extentW, px0: px, px1: px + panelSize };
    // image y runs downward; keep scene y pointing up
    const sy: Scale = { lo: 0, hi: extentH, px0: py + panelSize, px1: py };

    const cellW = Math.ceil(panelSize / grid.xs.length) + 1;
    const cellH = Math.ceil(panelSize / grid.ys.length) + 1;
    for (let yi = 0; yi < grid.ys.length; yi++) {
      for (let xi = 0; xi < grid.xs.length; xi++) {
        const g = grid.values[yi][xi];
        if (!Number.isFinite(g)) continue;
        const t = vmax === vmin ? 0.5 : (g - vmin) / (vmax - vmin);
        const cx = scalePos(sx, grid.xs[xi]);
        const cy = scalePos(sy, grid.ys[yi]);
        canvas.fillRect(cx - cellW / 2, cy - cellH / 2, cellW, cellH, heatColor(t));
      }
    }
    canvas.strokeRect(px, py, panelSize, panelSize, BLACK);

    if (scene) {
      for (const o of scene.obstacles) {
        const ox = scalePos(sx, o.x_min);
        const oy = scalePos(sy, o.y_max);
        canvas.strokeRect(ox, oy, scalePos(sx, o.x_max) - ox,
          scalePos(sy, o.y_min) - oy, BLACK);
      }
      const selected = new Set((associations ?? []).map((a) => a.apIndex));
      scene.aps.forEach(([ax, ay], i) => {
        const mx = scalePos(sx, ax);
        const my = scalePos(sy, ay);
        if (selected.has(i)) {
          canvas.drawMarker(mx, my, 9, WHITE);
          canvas.drawMarker(mx, my, 5, BLACK);
        } else {
          canvas.drawMarker(mx, my, 5, GRAY);
        }
      });
      if (ue) {
        const mx = scalePos(sx, ue[0]);
        const my = scalePos(sy, ue[1]);
        canvas.drawMarker(mx, my, 11, WHITE);
        canvas.strokeRect(mx - 5.5, my - 5.5, 11, 11, BLACK);
      }
    }
  });

  // colorbar
  const bx = width - MARGIN - barW + 16;
  const by = MARGIN + TITLE_H;
  for (let i = 0; i < panelSize; i++) {
    const t = 1 - i / (panelSize - 1);
    canvas.fillRect(bx, by + i, 14, 1, heatColor(t));
  }
  canvas.strokeRect(bx, by, 14, panelSize, BLACK);
  canvas.drawText(bx + 18, by - 3, fmtTick(vmax), BLACK);
  canvas.drawText(bx + 18, by + panelSize - 4, fmtTick(vmin), BLACK);
  canvas.drawText(bx, by - 14, "DB", BLACK);

  return { canvas, model: { kind: "heatmap", labels, vmin, vmax, grids, scene, associations } };
}

// ---------------------------------------------------------------------------
// Curves
// ---------------------------------------------------------------------------

export interface CurvesModel {
  kind: "curves";
  labels: string[];
  curves: Curve[];
}

export function buildCurves(
  inputs: string[],
  width = 640,
  height = 420,
): { canvas: Canvas; model: CurvesModel } {
  if (inputs.length === 0) throw new Error("curves needs at least one CSV");
  const curves = inputs.map(parseCurvesCsv);
  const labels = inputs.map(fileStem);

  const xs = curves.flatMap((c) => c.rounds);
  const ys = curves.flatMap((c) => c.mse);
  const pad = (Math.max(...ys) - Math.min(...ys)) * 0.05 || 1;
  const sx: Scale = { lo: Math.min(...xs), hi: Math.max(...xs), px0: MARGIN + 20, px1: width - 20 };
  const sy: Scale = {
    lo: Math.min(...ys) - pad, hi: Math.max(...ys) + pad,
    px0: height - MARGIN, px1: MARGIN,
  };

  const canvas = new Canvas(width, height);
  drawAxes(canvas, sx, sy, "ROUND", "VAL MSE (DB2)");

  curves.forEach((curve, ci) => {
    const color = SERIES_COLORS[ci % SERIES_COLORS.length];
    for (let i = 1; i < curve.rounds.length; i++) {
      canvas.drawLine(
        scalePos(sx, curve.rounds[i - 1]), scalePos(sy, curve.mse[i - 1]),
        scalePos(sx, curve.rounds[i]), scalePos(sy, curve.mse[i]), color);
    }
  });

  labels.forEach((label, ci) => {
    const color = SERIES_COLORS[ci % SERIES_COLORS.length];
    const ly = MARGIN + 6 + ci * 12;
    const lx = width - 24 - canvas.textWidth(label) - 18;
    canvas.fillRect(lx, ly + 2, 12, 3, color);
    canvas.drawText(lx + 16, ly, label, BLACK);
  });

  return { canvas, model: { kind: "curves", labels, curves } };
}

// ---------------------------------------------------------------------------
// Box
// ---------------------------------------------------------------------------

export interface BoxModel {
  kind: "box";
  labels: string[];
  stats: BoxStats[];
}

export function buildBox(
  inputs: string[],
  width = 560,
  height = 420,
): { canvas: Canvas; model: BoxModel } {
  if (inputs.length === 0) throw new Error("box needs at least one stats CSV");
  const stats = inputs.map(parseBoxStatsCsv);
  const labels = inputs.map(fileStem);

  const lows = stats.flatMap((s) => [s.lowerFence, ...s.outliers]);
  const highs = stats.flatMap((s) => [s.upperFence, ...s.outliers]);
  const lo = Math.min(...lows);
  const hi = Math.max(...highs);
  const pad = (hi - lo) * 0.08 || 1;
  const sy: Scale = { lo: lo - pad, hi: hi + pad, px0: height - MARGIN, px1: MARGIN };
  const sx: Scale = { lo: 0, hi: stats.length, px0: MARGIN + 20, px1: width - 20 };

  const canvas = new Canvas(width, height);
  drawAxes(canvas, sx, sy, "", "MAE (DB)", { xTicks: false });

  const slotW = (sx.px1 - sx.px0) / stats.length;
  const boxW = Math.min(70, slotW * 0.5);
  stats.forEach((s, i) => {
    const cx = sx.px0 + (i + 0.5) * slotW;
    const color = SERIES_COLORS[i % SERIES_COLORS.length];
    const yQ1 = scalePos(sy, s.q1);
    const yQ3 = scalePos(sy, s.q3);
    const yMed = scalePos(sy, s.median);
    const yLo = scalePos(sy, s.lowerFence);
    const yHi = scalePos(sy, s.upperFence);
    // whiskers drawn at the fences (the stats file carries fences, not extrema)
    canvas.drawLine(cx, yQ1, cx, yLo, BLACK);
    canvas.drawLine(cx, yQ3, cx, yHi, BLACK);
    canvas.drawLine(cx - boxW / 4, yLo, cx + boxW / 4, yLo, BLACK);
    canvas.drawLine(cx - boxW / 4, yHi, cx + boxW / 4, yHi, BLACK);
    canvas.fillRect(cx - boxW / 2, yQ3, boxW, yQ1 - yQ3, [235, 235, 250]);
    canvas.strokeRect(cx - boxW / 2, yQ3, boxW, yQ1 - yQ3, color);
    canvas.drawLine(cx - boxW / 2, yMed, cx + boxW / 2, yMed, [200, 160, 0]);
    canvas.drawLine(cx - boxW / 2, yMed + 1, cx + boxW / 2, yMed + 1, [200, 160, 0]);
    for (const o of s.outliers) {
      canvas.drawMarker(cx, scalePos(sy, o), 3, BLACK);
    }
    canvas.drawText(cx - canvas.textWidth(labels[i]) / 2, height - MARGIN + 8,
      labels[i], BLACK);
  });

  return { canvas, model: { kind: "box", labels, stats } };
}

// ---------------------------------------------------------------------------

function drawAxes(canvas: Canvas, sx: Scale, sy: Scale, xLabel: string,
                  yLabel: string, opts: { xTicks?: boolean } = {}): void {
  const { xTicks = true } = opts;
  canvas.drawLine(sx.px0, sy.px0, sx.px1, sy.px0, BLACK);
  canvas.drawLine(sx.px0, sy.px0, sx.px0, sy.px1, BLACK);
  const nTicks = 5;
  for (let i = 0; i <= nTicks; i++) {
    const vy = sy.lo + ((sy.hi - sy.lo) * i) / nTicks;
    const py = scalePos(sy, vy);
    canvas.drawLine(sx.px0 - 3, py, sx.px0, py, BLACK);
    canvas.drawLine(sx.px0, py, sx.px1, py, LIGHT_GRAY);
    canvas.drawText(2, py - 3, fmtTick(vy), BLACK);
    if (xTicks) {
      const vx = sx.lo + ((sx.hi - sx.lo) * i) / nTicks;
      const px = scalePos(sx, vx);
      canvas.drawLine(px, sy.px0, px, sy.px0 + 3, BLACK);
      canvas.drawText(px - 6, sy.px0 + 6, fmtTick(vx), BLACK);
    }
  }
  if (xLabel) {
    canvas.drawText((sx.px0 + sx.px1) / 2 - canvas.textWidth(xLabel) / 2,
      sy.px0 + 20, xLabel, BLACK);
  }
  if (yLabel) {
    canvas.drawText(4, sy.px1 - 14, yLabel, BLACK);
  }
}

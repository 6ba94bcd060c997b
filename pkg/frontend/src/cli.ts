#!/usr/bin/env node
/** render-figs: turn chantwin CSV outputs into PNG figures.
 *
 *   render-figs --kind heatmap --in a.csv b.csv c.csv [--env env.json]
 *               [--assoc assoc.csv] [--ue x,y] --out fig.png
 *   render-figs --kind curves --in fl3.csv fl5.csv --out fig.png
 *   render-figs --kind box --in pl-box.csv mlp-box.csv --out fig.png
 */

import { writeFileSync } from "node:fs";

import { buildBox, buildCurves, buildHeatmap } from "./figures.js";

export interface RenderArgs {
  kind: "heatmap" | "curves" | "box";
  inputs: string[];
  env?: string;
  assoc?: string;
  ue?: [number, number];
  out: string;
}

export function parseArgs(argv: string[]): RenderArgs {
  let kind: string | undefined;
  const inputs: string[] = [];
  let env: string | undefined;
  let assoc: string | undefined;
  let ue: [number, number] | undefined;
  let out: string | undefined;

  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      if (i + 1 >= argv.length) throw new Error(`${arg} needs a value`);
      return argv[++i];
    };
    switch (arg) {
      case "--kind":
        kind = next();
        break;
      case "--in":
        while (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
          inputs.push(argv[++i]);
        }
        break;
      case "--env":
        env = next();
        break;
      case "--assoc":
        assoc = next();
        break;
      case "--ue": {
        const parts = next().split(",").map(Number);
        if (parts.length !== 2 || parts.some((v) => !Number.isFinite(v))) {
          throw new Error("--ue must be x,y");
        }
        ue = [parts[0], parts[1]];
        break;
      }
      case "--out":
        out = next();
        break;
      default:
        throw new Error(`unknown argument: ${arg}`);
    }
  }
  if (kind !== "heatmap" && kind !== "curves" && kind !== "box") {
    throw new Error(`--kind must be heatmap, curves, or box (got ${kind ?? "nothing"})`);
  }
  if (inputs.length === 0) throw new Error("--in needs at least one file");
  if (!out) throw new Error("--out is required");
  return { kind, inputs, env, assoc, ue, out };
}

export function render(args: RenderArgs): void {
  const built =
    args.kind === "heatmap" ? buildHeatmap(args.inputs, args.env, args.assoc, args.ue)
    : args.kind === "curves" ? buildCurves(args.inputs)
    : buildBox(args.inputs);
  writeFileSync(args.out, built.canvas.toPng());
}

export function main(argv: string[]): number {
  try {
    const args = parseArgs(argv);
    render(args);
    console.log(`wrote ${args.out}`);
    return 0;
  } catch (err) {
    console.error(`render-figs: error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

const invokedDirectly = process.argv[1] && import.meta.url.endsWith(
  process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}

#!/usr/bin/env node
/** CLI: render one figure or every recognized dataset in a directory. */

import { FigureKind, render, renderAll } from "./figures.js";

function parseArgs(argv: string[]): Map<string, string> {
  const out = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 1) {
    if (argv[i].startsWith("--")) {
      out.set(argv[i].slice(2), argv[i + 1] ?? "");
      i += 1;
    }
  }
  return out;
}

function usage(): void {
  console.log("usage: render --kind scaling|heatmap|collapse|depth-decay --input data.csv --out fig.svg [--params fit.json]");
  console.log("       render-all --dir results/ [--out figures/]");
}

export function main(argv: string[]): number {
  const cmd = argv[0];
  const args = parseArgs(argv.slice(1));
  try {
    if (cmd === "render") {
      const kind = args.get("kind") as FigureKind;
      const input = args.get("input");
      const output = args.get("out");
      if (!kind || !input || !output) {
        usage();
        return 2;
      }
      const written = render({ kind, input, output, paramsFile: args.get("params") });
      console.log(written);
      return 0;
    }
    if (cmd === "render-all") {
      const dir = args.get("dir");
      if (!dir) {
        usage();
        return 2;
      }
      const res = renderAll(dir, args.get("out"));
      for (const f of res.figures) console.log(f);
      return 0;
    }
    usage();
    return 2;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

const invokedDirectly = process.argv[1] && /index\.(ts|js)$/.test(process.argv[1]);
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}

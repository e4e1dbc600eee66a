/** Figure builders over the results CSV contract. */

import * as fs from "node:fs";
import * as path from "node:path";
import { ResultRow, parseResults, regionValue } from "./csv.js";
import { Series, heatmapPlot, linePlot } from "./svg.js";

export type FigureKind = "scaling" | "heatmap" | "collapse" | "depth-decay";

export interface FigureSpec {
  kind: FigureKind;
  input: string;
  output: string;
  /** collapse figures read (p_c, nu) from this JSON instead of refitting */
  paramsFile?: string;
  title?: string;
}

export interface CollapseParams {
  p_c: number;
  nu: number;
}

function bySeries<K>(rows: ResultRow[], key: (r: ResultRow) => K): Map<K, ResultRow[]> {
  const out = new Map<K, ResultRow[]>();
  for (const r of rows) {
    const k = key(r);
    if (!out.has(k)) out.set(k, []);
    out.get(k)!.push(r);
  }
  return out;
}

export function scalingFigure(rows: ResultRow[], title: string): string {
  const data = rows.filter((r) => r.observable === "S_A" && regionValue(r.region, "LA") !== null);
  if (data.length === 0) throw new Error("no S_A rows with LA regions");
  const series: Series[] = [];
  for (const [L, rs] of [...bySeries(data, (r) => r.L)].sort((a, b) => a[0] - b[0])) {
    series.push({
      label: `L=${L}`,
      points: rs.map((r) => [regionValue(r.region, "LA")!, r.mean] as [number, number]),
    });
  }
  return linePlot(series, { title, xlabel: "subsystem size L_A", ylabel: "S (nats)" });
}

export function heatmapFigure(rows: ResultRow[], title: string): string {
  const data = rows.filter((r) => r.observable === "I_AB" && r.p_x !== null && r.p_z !== null);
  if (data.length === 0) throw new Error("no I_AB rows with (p_x, p_z) coordinates");
  const cells = data.map((r) => ({ x: r.p_x!, y: r.p_z!, v: r.mean }));
  return heatmapPlot(cells, { title, xlabel: "p_x", ylabel: "p_z" });
}

export function collapseFigure(rows: ResultRow[], params: CollapseParams, title: string): string {
  const data = rows.filter((r) => r.observable === "I_AB");
  if (data.length === 0) throw new Error("no I_AB rows");
  const param = (r: ResultRow) => r.p_y ?? r.p_x ?? r.p_z ?? r.theta;
  const usable = data.filter((r) => param(r) !== null);
  // pick the sweep axis: the p column with the most distinct values
  const axes: Array<[string, (r: ResultRow) => number | null]> = [
    ["p_x", (r) => r.p_x], ["p_y", (r) => r.p_y], ["p_z", (r) => r.p_z], ["theta", (r) => r.theta],
  ];
  let best: (r: ResultRow) => number | null = axes[0][1];
  let bestCount = -1;
  for (const [, get] of axes) {
    const vals = new Set(usable.map(get).filter((v) => v !== null));
    if (vals.size > bestCount) { bestCount = vals.size; best = get; }
  }
  const series: Series[] = [];
  for (const [L, rs] of [...bySeries(usable, (r) => r.L)].sort((a, b) => a[0] - b[0])) {
    series.push({
      label: `L=${L}`,
      points: rs
        .filter((r) => best(r) !== null)
        .map((r) => [(best(r)! - params.p_c) * Math.pow(r.L, 1 / params.nu), r.mean] as [number, number]),
    });
  }
  return linePlot(series, {
    title: `${title}  (p_c=${params.p_c.toFixed(3)}, nu=${params.nu.toFixed(2)})`,
    xlabel: "L^(1/nu) (p - p_c)", ylabel: "I_AB (nats)",
  });
}

export function depthDecayFigure(rows: ResultRow[], title: string): string {
  const data = rows.filter((r) => r.observable === "S_row" && regionValue(r.region, "row") !== null);
  if (data.length === 0) throw new Error("no S_row rows");
  const series: Series[] = [];
  for (const [kind, rs] of [...bySeries(data, (r) => r.kind)].sort()) {
    series.push({
      label: kind,
      points: rs.map((r) => [regionValue(r.region, "row")!, r.mean] as [number, number]),
    });
  }
  return linePlot(series, { title, xlabel: "evolution row", ylabel: "S at central cut (nats)" });
}

export function render(spec: FigureSpec): string {
  const rows = parseResults(fs.readFileSync(spec.input, "utf-8"));
  const title = spec.title ?? path.basename(spec.input).replace(/\.csv$/, "");
  let svg: string;
  if (spec.kind === "scaling") {
    svg = scalingFigure(rows, title);
  } else if (spec.kind === "heatmap") {
    svg = heatmapFigure(rows, title);
  } else if (spec.kind === "collapse") {
    if (!spec.paramsFile) throw new Error("collapse figures need a params JSON file");
    const fit = JSON.parse(fs.readFileSync(spec.paramsFile, "utf-8"));
    const params: CollapseParams = { p_c: fit.params.p_c, nu: fit.params.nu };
    svg = collapseFigure(rows, params, title);
  } else if (spec.kind === "depth-decay") {
    svg = depthDecayFigure(rows, title);
  } else {
    throw new Error(`unknown figure kind: ${(spec as FigureSpec).kind}`);
  }
  fs.mkdirSync(path.dirname(spec.output), { recursive: true });
  fs.writeFileSync(spec.output, svg);
  return spec.output;
}

/** Classify a results CSV by content; null = not a recognized dataset kind. */
export function classify(csvPath: string): FigureKind | null {
  let rows: ResultRow[];
  try {
    rows = parseResults(fs.readFileSync(csvPath, "utf-8"));
  } catch {
    return null;
  }
  if (rows.some((r) => r.observable === "S_row")) return "depth-decay";
  if (rows.some((r) => r.observable === "S_A")) return "scaling";
  const mi = rows.filter((r) => r.observable === "I_AB");
  if (mi.length > 0) {
    const sidecar = csvPath.replace(/\.csv$/, ".json");
    if (fs.existsSync(sidecar)) return "collapse";
    const px = new Set(mi.map((r) => r.p_x));
    const pz = new Set(mi.map((r) => r.p_z));
    if (px.size >= 2 && pz.size >= 2) return "heatmap";
  }
  return null;
}

export interface RenderAllResult {
  figures: string[];
  skipped: string[];
}

export function renderAll(dir: string, outDir?: string): RenderAllResult {
  const out = outDir ?? dir;
  const entries = fs.existsSync(dir)
    ? fs.readdirSync(dir).filter((f: string) => f.endsWith(".csv")).sort()
    : [];
  const figures: string[] = [];
  const skipped: string[] = [];
  for (const f of entries) {
    const full = path.join(dir, f);
    const kind = classify(full);
    if (kind === null) {
      skipped.push(f);
      console.log(`skipping unrecognized dataset: ${f}`);
      continue;
    }
    const output = path.join(out, f.replace(/\.csv$/, ".svg"));
    render({
      kind,
      input: full,
      output,
      paramsFile: kind === "collapse" ? full.replace(/\.csv$/, ".json") : undefined,
    });
    figures.push(output);
  }
  if (entries.length === 0) {
    console.warn(`no CSV datasets found in ${dir}`);
  }
  if (figures.length > 0) {
    const index = [
      "<!doctype html>", "<html><head><meta charset=\"utf-8\"><title>results</title></head><body>",
      ...figures.map((f) => `<div><h3>${path.basename(f)}</h3><img src="${path.basename(f)}"/></div>`),
      "</body></html>",
    ].join("\n");
    fs.mkdirSync(out, { recursive: true });
    fs.writeFileSync(path.join(out, "index.html"), index);
  }
  return { figures, skipped };
}

/** Dependency-free SVG chart primitives: line/scatter panels and heatmaps. */

export interface Series {
  label: string;
  points: Array<[number, number]>;
  color?: string;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
  "#8c564b", "#17becf", "#7f7f7f", "#bcbd22"];

const W = 640;
const H = 440;
const M = { left: 70, right: 24, top: 40, bottom: 56 };

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function ticks(lo: number, hi: number, n = 5): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const err = span / n / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = step * mult;
  const out: number[] = [];
  for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-12 * span; v += s) out.push(v);
  return out;
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) return String(Math.round(v * 1000) / 1000);
  return v.toExponential(1);
}

export function linePlot(series: Series[], opts: {
  title: string; xlabel: string; ylabel: string; markers?: boolean;
}): string {
  const pts = series.flatMap((s) => s.points);
  if (pts.length === 0) throw new Error("no points to plot");
  let xlo = Math.min(...pts.map((p) => p[0]));
  let xhi = Math.max(...pts.map((p) => p[0]));
  let ylo = Math.min(...pts.map((p) => p[1]));
  let yhi = Math.max(...pts.map((p) => p[1]));
  if (xhi === xlo) { xhi += 1; xlo -= 1; }
  if (yhi === ylo) { yhi += 1; ylo -= 1; }
  const padY = 0.06 * (yhi - ylo);
  ylo -= padY; yhi += padY;
  const sx = (x: number) => M.left + ((x - xlo) / (xhi - xlo)) * (W - M.left - M.right);
  const sy = (y: number) => H - M.bottom - ((y - ylo) / (yhi - ylo)) * (H - M.top - M.bottom);
  const parts: string[] = [];
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}" font-family="sans-serif">`);
  parts.push(`<rect width="${W}" height="${H}" fill="white"/>`);
  parts.push(`<text x="${W / 2}" y="22" text-anchor="middle" font-size="15">${esc(opts.title)}</text>`);
  for (const t of ticks(xlo, xhi)) {
    const x = sx(t);
    parts.push(`<line x1="${x}" y1="${H - M.bottom}" x2="${x}" y2="${M.top}" stroke="#eee"/>`);
    parts.push(`<text x="${x}" y="${H - M.bottom + 18}" text-anchor="middle" font-size="11">${fmt(t)}</text>`);
  }
  for (const t of ticks(ylo, yhi)) {
    const y = sy(t);
    parts.push(`<line x1="${M.left}" y1="${y}" x2="${W - M.right}" y2="${y}" stroke="#eee"/>`);
    parts.push(`<text x="${M.left - 6}" y="${y + 4}" text-anchor="end" font-size="11">${fmt(t)}</text>`);
  }
  parts.push(`<rect x="${M.left}" y="${M.top}" width="${W - M.left - M.right}" height="${H - M.top - M.bottom}" fill="none" stroke="#333"/>`);
  parts.push(`<text x="${W / 2}" y="${H - 14}" text-anchor="middle" font-size="13">${esc(opts.xlabel)}</text>`);
  parts.push(`<text x="18" y="${H / 2}" text-anchor="middle" font-size="13" transform="rotate(-90 18 ${H / 2})">${esc(opts.ylabel)}</text>`);
  series.forEach((s, i) => {
    const color = s.color ?? PALETTE[i % PALETTE.length];
    const sorted = [...s.points].sort((a, b) => a[0] - b[0]);
    const path = sorted.map((p, k) => `${k === 0 ? "M" : "L"}${sx(p[0]).toFixed(2)},${sy(p[1]).toFixed(2)}`).join(" ");
    parts.push(`<path d="${path}" fill="none" stroke="${color}" stroke-width="1.6"/>`);
    if (opts.markers !== false) {
      for (const p of sorted) {
        parts.push(`<circle cx="${sx(p[0]).toFixed(2)}" cy="${sy(p[1]).toFixed(2)}" r="3" fill="${color}"/>`);
      }
    }
    parts.push(`<text x="${W - M.right - 8}" y="${M.top + 16 + 16 * i}" text-anchor="end" font-size="12" fill="${color}">${esc(s.label)}</text>`);
  });
  parts.push("</svg>");
  return parts.join("\n");
}

function colorMap(t: number): string {
  // simple blue -> white -> red diverging scale on [0, 1]
  const clamp = (v: number) => Math.max(0, Math.min(1, v));
  t = clamp(t);
  const r = Math.round(255 * clamp(t * 2));
  const b = Math.round(255 * clamp(2 - 2 * t));
  const g = Math.round(255 * clamp(1.6 - Math.abs(2 * t - 1) * 1.6));
  return `rgb(${r},${g},${b})`;
}

export function heatmapPlot(cells: Array<{ x: number; y: number; v: number }>, opts: {
  title: string; xlabel: string; ylabel: string;
}): string {
  if (cells.length === 0) throw new Error("no cells to plot");
  const xs = [...new Set(cells.map((c) => c.x))].sort((a, b) => a - b);
  const ys = [...new Set(cells.map((c) => c.y))].sort((a, b) => a - b);
  const vlo = Math.min(...cells.map((c) => c.v));
  const vhi = Math.max(...cells.map((c) => c.v));
  const cw = (W - M.left - M.right) / xs.length;
  const ch = (H - M.top - M.bottom) / ys.length;
  const xi = new Map(xs.map((x, i) => [x, i]));
  const yi = new Map(ys.map((y, i) => [y, i]));
  const parts: string[] = [];
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}" font-family="sans-serif">`);
  parts.push(`<rect width="${W}" height="${H}" fill="white"/>`);
  parts.push(`<text x="${W / 2}" y="22" text-anchor="middle" font-size="15">${esc(opts.title)}</text>`);
  for (const c of cells) {
    const t = vhi > vlo ? (c.v - vlo) / (vhi - vlo) : 0.5;
    const x = M.left + xi.get(c.x)! * cw;
    const y = H - M.bottom - (yi.get(c.y)! + 1) * ch;
    parts.push(`<rect x="${x.toFixed(2)}" y="${y.toFixed(2)}" width="${cw.toFixed(2)}" height="${ch.toFixed(2)}" fill="${colorMap(t)}"><title>${fmt(c.v)}</title></rect>`);
  }
  xs.forEach((x, i) => {
    if (xs.length <= 12 || i % Math.ceil(xs.length / 12) === 0) {
      parts.push(`<text x="${(M.left + (i + 0.5) * cw).toFixed(1)}" y="${H - M.bottom + 18}" text-anchor="middle" font-size="11">${fmt(x)}</text>`);
    }
  });
  ys.forEach((y, i) => {
    if (ys.length <= 12 || i % Math.ceil(ys.length / 12) === 0) {
      parts.push(`<text x="${M.left - 6}" y="${(H - M.bottom - (i + 0.5) * ch + 4).toFixed(1)}" text-anchor="end" font-size="11">${fmt(y)}</text>`);
    }
  });
  parts.push(`<text x="${W / 2}" y="${H - 14}" text-anchor="middle" font-size="13">${esc(opts.xlabel)}</text>`);
  parts.push(`<text x="18" y="${H / 2}" text-anchor="middle" font-size="13" transform="rotate(-90 18 ${H / 2})">${esc(opts.ylabel)}</text>`);
  parts.push(`<text x="${W - M.right - 8}" y="${M.top + 14}" text-anchor="end" font-size="11">range [${fmt(vlo)}, ${fmt(vhi)}]</text>`);
  parts.push(`<rect x="${M.left}" y="${M.top}" width="${W - M.left - M.right}" height="${H - M.top - M.bottom}" fill="none" stroke="#333"/>`);
  parts.push("</svg>");
  return parts.join("\n");
}

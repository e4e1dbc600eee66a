/** CSV access for the shared results contract. */

export interface ResultRow {
  lattice: string;
  kind: string;
  L: number;
  p_x: number | null;
  p_y: number | null;
  p_z: number | null;
  theta: number | null;
  phi: number | null;
  observable: string;
  region: string;
  mean: number;
  sem: number;
  n_traj: number;
  seed: number;
  max_bond: number | null;
  discarded_weight: number | null;
}

export const REQUIRED_COLUMNS = [
  "lattice", "kind", "L", "p_x", "p_y", "p_z", "theta", "phi",
  "observable", "region", "mean", "sem", "n_traj", "seed",
  "max_bond", "discarded_weight",
];

function splitLine(line: string): string[] {
  return line.split(",").map((s) => s.trim());
}

function num(v: string): number | null {
  if (v === "" || v === undefined) return null;
  const x = Number(v);
  if (Number.isNaN(x)) throw new Error(`not a number: ${v}`);
  return x;
}

export function parseResults(text: string): ResultRow[] {
  const lines = text.split(/\r?\n/).filter((l) => l.trim() !== "");
  if (lines.length === 0) throw new Error("empty CSV");
  const header = splitLine(lines[0]);
  for (const col of REQUIRED_COLUMNS) {
    if (!header.includes(col)) throw new Error(`missing column: ${col}`);
  }
  const idx = new Map(header.map((h, i) => [h, i]));
  const rows: ResultRow[] = [];
  for (const line of lines.slice(1)) {
    const parts = splitLine(line);
    const get = (c: string) => parts[idx.get(c)!] ?? "";
    rows.push({
      lattice: get("lattice"),
      kind: get("kind"),
      L: num(get("L")) ?? 0,
      p_x: num(get("p_x")),
      p_y: num(get("p_y")),
      p_z: num(get("p_z")),
      theta: num(get("theta")),
      phi: num(get("phi")),
      observable: get("observable"),
      region: get("region"),
      mean: num(get("mean")) ?? 0,
      sem: num(get("sem")) ?? 0,
      n_traj: num(get("n_traj")) ?? 0,
      seed: num(get("seed")) ?? 0,
      max_bond: num(get("max_bond")),
      discarded_weight: num(get("discarded_weight")),
    });
  }
  return rows;
}

/** Pull an integer tagged inside a region string, e.g. "LA=16" or "row=3;cut=6". */
export function regionValue(region: string, tag: string): number | null {
  for (const part of region.split(";")) {
    const [k, v] = part.split("=");
    if (k === tag) return Number(v);
  }
  return null;
}

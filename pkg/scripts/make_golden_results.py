#!/usr/bin/env python3
"""Produce a golden results directory: one dataset per figure kind.

Emits scaling.csv (entropy profile), heatmap.csv (mutual information over a
Pauli-mix grid), collapse.csv + collapse.json (transition sweep and fitted
parameters), depth_decay.csv (entropy vs evolution depth), all in the shared
CSV contract. --fast shrinks sizes for test use.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from isingboundary import boundary as bnd
from isingboundary import lattice as lat
from isingboundary import stabilizer as stab
from isingboundary.analysis import ScalingDataset, collapse
from isingboundary.measure import MeasurementLayout, sample_layout
from isingboundary.mps import CompressionPolicy


def write(ds, path):
    with open(path, "w") as fh:
        ds.to_csv(fh)
    print(path)


def scaling_profile(out, fast):
    Ls = (12, 16, 24) if fast else (16, 32, 64)
    n_traj = 40 if fast else 200
    ds = ScalingDataset()
    mix = stab.PauliMix(0.5, 0.0, 0.5)
    for L in Ls:
        cuts = list(range(2, L - 1, 2))
        prof = stab.entropy_profile("xvertex", "lieb", mix, L, cuts,
                                    n_traj=n_traj, seed=101, ly_factor=2)
        ds.rows.extend(prof.rows)
    write(ds, os.path.join(out, "scaling.csv"))


def heatmap(out, fast):
    L = 12 if fast else 24
    n_traj = 30 if fast else 150
    ds = ScalingDataset()
    vals = np.linspace(0.0, 1.0, 5 if fast else 9)
    pair = stab.antipodal_regions(L, 0.25)
    for px in vals:
        for pz in vals:
            if px + pz > 1.0 + 1e-9:
                continue
            mix = stab.PauliMix(round(px, 6), round(1 - px - pz, 6), round(pz, 6))
            mi = [stab.chain_xvertex_run(L, 2 * L, mix=mix, seed=77, traj=t).mutual_info(pair)
                  for t in range(n_traj)]
            ds.add(lattice="lieb", kind="xvertex", L=L, p_x=mix.p_x, p_y=mix.p_y,
                   p_z=mix.p_z, observable="I_AB",
                   region=f"A=0:{pair.a_len};B={pair.b_start}:{pair.b_start+pair.b_len}",
                   mean=float(np.mean(mi)), sem=float(np.std(mi) / math.sqrt(n_traj)),
                   n_traj=n_traj, seed=77)
    write(ds, os.path.join(out, "heatmap.csv"))


def collapse_set(out, fast):
    Ls = (8, 12, 16) if fast else (16, 32, 64)
    n_traj = 40 if fast else 300
    grid = [round(0.455 + 0.005 * k, 4) for k in range(19)]
    mixes = [stab.PauliMix(p, 0.0, round(1 - p, 6)) for p in grid]
    ds = stab.sweep("xvertex", "lieb", mixes, list(Ls), n_traj=n_traj, seed=5)
    write(ds, os.path.join(out, "collapse.csv"))
    pts = [(r.L, r.p_x, r.mean) for r in ds.rows if r.observable == "I_AB"]
    fit = collapse(pts, (0.45, 0.55), (0.9, 2.2))
    path = os.path.join(out, "collapse.json")
    with open(path, "w") as fh:
        fh.write(fit.to_json())
    print(path)


def depth_decay(out, fast):
    Lx = 6 if fast else 12
    Ly = 24 if fast else 100
    n_traj = 4 if fast else 20
    spec = lat.LatticeSpec("square", Lx, Ly)
    ds = ScalingDataset()
    for policy in ("random", "forced+"):
        layout = MeasurementLayout(theta_o=0.85 * math.pi / 2, phi_o=0.0,
                                   policy=policy, seed=17)
        curves = []
        for t in range(n_traj):
            cl = sample_layout(layout, spec, t)
            _, diags = bnd.evolve(spec, cl, CompressionPolicy(), cuts=[Lx // 2])
            curves.append([d.entropies.get(Lx // 2, 0.0) for d in diags[:-1]])
        arr = np.array(curves)
        for k in range(arr.shape[1]):
            ds.add(lattice="square", kind=policy, L=Lx, theta=0.85 * math.pi / 2, phi=0.0,
                   observable="S_row", region=f"row={k + 1};cut={Lx // 2}",
                   mean=float(arr[:, k].mean()),
                   sem=float(arr[:, k].std() / math.sqrt(n_traj)),
                   n_traj=n_traj, seed=17)
    write(ds, os.path.join(out, "depth_decay.csv"))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/golden")
    ap.add_argument("--fast", action="store_true")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    scaling_profile(args.out, args.fast)
    heatmap(args.out, args.fast)
    collapse_set(args.out, args.fast)
    depth_decay(args.out, args.fast)


if __name__ == "__main__":
    main()

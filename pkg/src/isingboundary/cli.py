"""Configuration-driven runner binding all engines.

Subcommands: run, verify, sweep, collapse. Artifacts are named from the
config digest plus seed, so identical configs reproduce byte-identical
files. Exit codes: 0 success, 1 runtime failure, 2 config failure.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import boundary as bnd
from . import ising
from . import lattice as lat
from . import oracle as orc
from . import stabilizer as stab
from .analysis import ScalingDataset, collapse, log_sine_fit, phase_classify
from .config import ConfigError, load_config
from .measure import (Direction, MeasurementLayout, Weight, direction_weight,
                      hadamard_weight, outcome_weight, sample_layout)
from .mps import prefix_renyi2, tt_dot


def _cuts_list(cfg, ring):
    if cfg.cuts == "half":
        return [ring // 2]
    if cfg.cuts == "all":
        return list(range(1, ring))
    return [int(v) for v in cfg.cuts.split(",")]


def _ensure_out(out):
    os.makedirs(out, exist_ok=True)
    return out


def _welford_rows(ds, base, obs_region_vals, n_traj, seed, extra=None):
    for (obs, region), vals in obs_region_vals.items():
        vals = np.asarray(vals, dtype=float)
        row = dict(base)
        row.update(observable=obs, region=region, mean=float(vals.mean()),
                   sem=float(vals.std() / math.sqrt(len(vals))) if len(vals) > 1 else 0.0,
                   n_traj=n_traj, seed=seed)
        if extra:
            row.update(extra)
        ds.add(**row)


def cmd_run(cfg, out_dir, workers):
    spec = cfg.validate()
    ds = ScalingDataset()
    base = dict(lattice=cfg.lattice, kind=cfg.model if cfg.engine == "stabilizer" else cfg.engine,
                L=cfg.Lx, p_x=None, p_y=None, p_z=None, theta=cfg.theta_o, phi=cfg.phi_o)

    if cfg.engine in ("mps", "circuit"):
        ring = cfg.Lx if cfg.lattice == lat.SQUARE else 2 * cfg.Lx - 1
        cuts = _cuts_list(cfg, cfg.Lx)
        runner = bnd.evolve if cfg.engine == "mps" else bnd.run_circuit
        prof = {}
        depth = {}
        max_bond = 0
        disc = []
        for t in range(cfg.n_traj):
            layout = sample_layout(cfg.layout(), spec, traj=t)
            tt, diags = runner(spec, layout, cfg.policy(), cuts=cuts)
            for c in range(1, ring):
                prof.setdefault(("S_A", f"LA={c}"), []).append(prefix_renyi2(tt, c))
            for d in diags:
                for c, s in d.entropies.items():
                    depth.setdefault(("S_row", f"row={d.row};cut={c}"), []).append(s)
                max_bond = max(max_bond, d.max_bond)
            disc.append(tt.discarded_total)
        extra = {"max_bond": max_bond, "discarded_weight": float(np.mean(disc))}
        _welford_rows(ds, base, prof, cfg.n_traj, cfg.seed, extra)
        _welford_rows(ds, base, depth, cfg.n_traj, cfg.seed, extra)
    elif cfg.engine == "oracle":
        vals = {}
        for t in range(cfg.n_traj):
            layout = sample_layout(cfg.layout(), spec, traj=t)
            st, _ = orc.dense_boundary(spec, layout)
            bsites = [b.index for b in lat.boundary_sites(spec)]
            for c in range(1, len(bsites)):
                vals.setdefault(("S_A", f"LA={c}"), []).append(orc.dense_renyi2(st, bsites[:c]))
        _welford_rows(ds, base, vals, cfg.n_traj, cfg.seed)
    elif cfg.engine == "stabilizer":
        mix = stab.PauliMix(cfg.p_x, cfg.p_y, cfg.p_z)
        base.update(p_x=cfg.p_x, p_y=cfg.p_y, p_z=cfg.p_z, theta=None, phi=None)
        vals = {}
        for t in range(cfg.n_traj):
            if cfg.model == "xvertex":
                res = stab.chain_xvertex_run(cfg.Lx, cfg.Ly, mix=mix, seed=cfg.seed,
                                             traj=t, bottom=cfg.bottom)
            else:
                res = stab.sliding_run(spec, mix=mix, seed=cfg.seed, traj=t,
                                       group_only=cfg.outcomes == "born",
                                       forced=None if cfg.outcomes == "born"
                                       else {"forced+": 1, "forced-": -1}.get(cfg.outcomes))
            ring = res.ring
            frac = cfg.region_frac or (0.25 if cfg.model == "xvertex" else 0.125)
            pair = stab.antipodal_regions(ring, frac)
            vals.setdefault(("S_half", f"LA={ring//2}"), []).append(res.entropy_interval(0, ring // 2))
            vals.setdefault(("I_AB", f"A=0:{pair.a_len};B={pair.b_start}:{pair.b_start+pair.b_len}"),
                            []).append(res.mutual_info(pair))
        base["L"] = ring
        _welford_rows(ds, base, vals, cfg.n_traj, cfg.seed)
    elif cfg.engine == "ising":
        if cfg.lattice == lat.SQUARE:
            n_spins = sum(1 for s in lat.enumerate_sites(spec) if lat.sublattice(spec, s) == lat.CIRC)
        else:
            n_spins = cfg.Lx * cfg.Ly
        if n_spins > ising.BRUTE_FORCE_CAP:
            raise ValueError(f"{n_spins} spins exceeds the brute-force cap")
        vals = {}
        for t in range(cfg.n_traj):
            layout = sample_layout(cfg.layout(), spec, traj=t)
            weights = layout.weights()
            for b in lat.boundary_sites(spec):
                weights[b.index] = outcome_weight(
                    direction_weight(Direction(cfg.theta_o, cfg.phi_o)), 1)
            model = ising.cluster_to_ising(spec, weights)
            Z = ising.brute_force_Z(model)
            logmag, _ = ising.scale_product(model)
            vals.setdefault(("log_abs_Z", "full"), []).append(math.log(abs(Z)) + logmag)
        _welford_rows(ds, base, vals, cfg.n_traj, cfg.seed)

    name = f"run_{cfg.engine}_{cfg.digest()}_s{cfg.seed}.csv"
    path = os.path.join(_ensure_out(out_dir), name)
    with open(path, "w") as fh:
        ds.to_csv(fh)
    print(path)
    return 0


def cmd_sweep(cfg, out_dir, workers):
    cfg.validate()
    if not cfg.L_list or not cfg.grid:
        raise ConfigError("sweep needs L_list and grid")
    if cfg.engine == "stabilizer":
        mixes = []
        for v in cfg.grid:
            rest = {"p_x": cfg.p_x, "p_y": cfg.p_y, "p_z": cfg.p_z}
            fixed = rest.pop(cfg.sweep_param)
            tot = sum(rest.values())
            scale = (1.0 - v) / tot if tot > 0 else 0.0
            params = {cfg.sweep_param: v}
            params.update({k: val * scale for k, val in rest.items()})
            mixes.append(stab.PauliMix(round(params["p_x"], 12), round(params["p_y"], 12),
                                       round(params["p_z"], 12)))
        ds = stab.sweep(cfg.model, cfg.lattice, mixes, list(cfg.L_list),
                        n_traj=cfg.n_traj, seed=cfg.seed,
                        region_frac=cfg.region_frac, bottom=cfg.bottom,
                        ly_factor=cfg.ly_factor, workers=workers)
    elif cfg.engine in ("mps", "circuit"):
        ds = ScalingDataset()
        runner = bnd.evolve if cfg.engine == "mps" else bnd.run_circuit
        for Lx in cfg.L_list:
            spec = lat.LatticeSpec(cfg.lattice, Lx, cfg.Ly, bottom=cfg.bottom)
            for v in cfg.grid:
                layout_spec = MeasurementLayout(
                    theta_o=v, phi_o=cfg.phi_o, theta_b=v, phi_b=cfg.phi_b,
                    policy=cfg.outcomes, seed=cfg.seed,
                    sign_randomize_b=cfg.sign_randomize)
                vals, bonds, disc = [], 0, []
                for t in range(cfg.n_traj):
                    cl = sample_layout(layout_spec, spec, traj=t)
                    tt, diags = runner(spec, cl, cfg.policy())
                    vals.append(prefix_renyi2(tt, max(1, tt.n_sites // 2)))
                    bonds = max(bonds, max(d.max_bond for d in diags))
                    disc.append(tt.discarded_total)
                ds.add(lattice=cfg.lattice, kind=cfg.engine, L=Lx, theta=v, phi=cfg.phi_o,
                       observable="S_half", region=f"LA={Lx//2}",
                       mean=float(np.mean(vals)),
                       sem=float(np.std(vals) / math.sqrt(len(vals))),
                       n_traj=cfg.n_traj, seed=cfg.seed, max_bond=bonds,
                       discarded_weight=float(np.mean(disc)))
    else:
        raise ConfigError(f"engine {cfg.engine!r} has no sweep mode")
    name = f"sweep_{cfg.engine}_{cfg.digest()}_s{cfg.seed}.csv"
    path = os.path.join(_ensure_out(out_dir), name)
    with open(path, "w") as fh:
        ds.to_csv(fh)
    print(path)
    return 0


def cmd_collapse(args):
    with open(args.input) as fh:
        ds = ScalingDataset.from_csv(fh)
    rows = [r for r in ds.rows if r.observable == args.observable]
    if not rows:
        raise ValueError(f"no rows with observable {args.observable!r}")
    param = args.param
    pts = []
    for r in rows:
        v = getattr(r, param)
        if v is None:
            raise ValueError(f"rows carry no {param!r} values")
        pts.append((r.L, v, r.mean))
    pc_lo, pc_hi = (float(x) for x in args.pc_box.split(":"))
    nu_lo, nu_hi = (float(x) for x in args.nu_box.split(":"))
    fit = collapse(pts, (pc_lo, pc_hi), (nu_lo, nu_hi))
    out = args.out or "."
    path = os.path.join(_ensure_out(out), os.path.basename(args.input).rsplit(".", 1)[0] + "_collapse.json")
    with open(path, "w") as fh:
        fh.write(fit.to_json())
    print(json.dumps(fit.params))
    print(path)
    return 0


# ----------------------------- verify suites -------------------------------


def _suite_povm(rng):
    checks = []
    worst = 0.0
    for _ in range(100):
        th = rng.uniform(0, math.pi)
        ph = rng.uniform(0, 2 * math.pi)
        mp, mm = bnd.weak_meas_kraus(th, ph)
        dev = np.abs(mp.conj().T @ mp + mm.conj().T @ mm - np.eye(2)).max()
        worst = max(worst, dev)
    checks.append(("povm_completeness", worst, 1e-12))
    worst = 0.0
    for _ in range(100):
        z = complex(rng.normal(), rng.normal())
        W = Weight.of(z)
        back = hadamard_weight(hadamard_weight(W))
        worst = max(worst, abs(back.value - z))
    checks.append(("hadamard_involution", worst, 1e-12))
    return checks


def _suite_oracle():
    checks = []
    for kind, Lx, Ly in ((lat.SQUARE, 3, 3), (lat.LIEB, 2, 2)):
        spec = lat.LatticeSpec(kind, Lx, Ly)
        layout = MeasurementLayout(theta_o=0.7, phi_o=0.4, theta_b=1.2, phi_b=3.9,
                                   policy="random", seed=5)
        worst = 0.0
        for t in range(5):
            cl = sample_layout(layout, spec, traj=t)
            st, _ = orc.dense_boundary(spec, cl)
            tt, _ = bnd.evolve(spec, cl)
            tt2, _ = bnd.run_circuit(spec, cl)
            vd = st.amps / np.linalg.norm(st.amps)
            for v in (tt.dense_normalized(), tt2.dense_normalized()):
                worst = max(worst, abs(1 - abs(np.vdot(vd, v)) ** 2))
        checks.append((f"triangle_{kind}", worst, 1e-10))
    return checks


def _suite_ising_ratio():
    spec = lat.LatticeSpec(lat.LIEB, 3, 2)
    layout = MeasurementLayout(theta_o=0.8, phi_o=0.3, theta_b=1.1, phi_b=5.2,
                               policy="random", seed=11)
    Wb = {b.index: Weight.of(0.4 + 0.1j) for b in lat.boundary_sites(spec)}
    ratios = []
    for t in range(20):
        cl = sample_layout(layout, spec, traj=t)
        sc = orc.full_projection_scalar(spec, cl, Wb)
        weights = cl.weights()
        weights.update(Wb)
        model = ising.cluster_to_ising(spec, weights)
        logmag, phase = ising.scale_product(model)
        ratios.append(sc / (ising.brute_force_Z(model) * phase * math.exp(logmag)))
    ratios = np.array(ratios)
    rel = float(np.std(ratios) / abs(ratios.mean()))
    return [("overlap_partition_ratio_relstd", rel, 1e-8)]


def _suite_stabilizer_limits():
    checks = []
    spec = lat.LatticeSpec(lat.SQUARE, 6, 6)
    res = stab.sliding_run(spec, assignment=np.array(["Z"] * lat.site_count(spec)), seed=0)
    got = res.tableau.stabilizer_group_on(res.boundary_cols)
    want = _cluster_chain_group(6, periodic=False)
    checks.append(("allZ_square_is_chain_cluster", 0.0 if np.array_equal(got, want) else 1.0, 0.5))
    spec = lat.LatticeSpec(lat.LIEB, 4, 4, bottom="rough")
    res = stab.sliding_run(spec, assignment=np.array(["X"] * lat.site_count(spec)), seed=0)
    ent = max(abs(res.entropy_interval(0, k)) for k in range(1, res.ring))
    checks.append(("allX_rough_product", ent, 1e-12))
    spec = lat.LatticeSpec(lat.LIEB, 4, 4, bottom="smooth")
    res = stab.sliding_run(spec, assignment=np.array(["X"] * lat.site_count(spec)), seed=0)
    worst = 0.0
    for k in range(1, res.ring):
        worst = max(worst, abs(res.entropy_interval(0, k) - math.log(2)))
    checks.append(("allX_smooth_ghz", worst, 1e-12))
    tags = bnd.transfer_gates(Weight.of(1), Weight.of(0), Weight.of(0)).tags
    ok = tags == {"t_zz": bnd.PROJECTOR, "t_z": bnd.PROJECTOR, "t_x": bnd.PROJECTOR}
    checks.append(("pauli_limit_tags", 0.0 if ok else 1.0, 0.5))
    return checks


def _cluster_chain_group(n, periodic):
    from .stabilizer import Tableau
    t = Tableau(n)
    for q in range(n):
        t.h(q)
    for q in range(n - 1):
        t.cz(q, q + 1)
    if periodic:
        t.cz(n - 1, 0)
    return t.stabilizer_group_on(list(range(n)))


def _suite_percolation_smoke():
    pair16 = stab.antipodal_regions(16, 0.25)
    mi = {}
    for p in (0.35, 0.5, 0.65):
        mix = stab.PauliMix(p, 0.0, round(1 - p, 10))
        vals = [stab.chain_xvertex_run(16, 32, mix=mix, seed=21, traj=t).mutual_info(pair16)
                for t in range(40)]
        mi[p] = float(np.mean(vals)) / math.log(2)
    checks = [("mi_decreasing_in_px", mi[0.65] - mi[0.35], 0.0),
              ("mi_mid_between", abs(mi[0.5] - 0.5) - 0.45, 0.0)]
    return checks


SUITES = {
    "povm": lambda: _suite_povm(np.random.default_rng(2)),
    "oracle-equivalence": _suite_oracle,
    "ising-ratio": _suite_ising_ratio,
    "stabilizer-limits": _suite_stabilizer_limits,
    "percolation-smoke": _suite_percolation_smoke,
}


def cmd_verify(suite, out_dir):
    if suite not in SUITES:
        print(f"unknown suite {suite!r}; choose from {sorted(SUITES)}", file=sys.stderr)
        return 2
    checks = SUITES[suite]()
    report = {"suite": suite, "checks": [], "pass": True}
    for name, value, bound in checks:
        ok = bool(value <= bound)
        report["checks"].append({"name": name, "value": float(value),
                                 "bound": float(bound), "pass": ok})
        report["pass"] = bool(report["pass"] and ok)
        print(f"{'PASS' if ok else 'FAIL'} {name}: {value:.3e} (bound {bound:.3e})")
    path = os.path.join(_ensure_out(out_dir), f"verify_{suite}.json")
    with open(path, "w") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
    print(path)
    return 0 if report["pass"] else 1


def main(argv=None):
    ap = argparse.ArgumentParser(prog="isingboundary")
    sub = ap.add_subparsers(dest="cmd", required=True)
    for name in ("run", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out", default="results")
    p = sub.add_parser("verify")
    p.add_argument("--suite", required=True)
    p.add_argument("--out", default="results")
    p = sub.add_parser("collapse")
    p.add_argument("--input", required=True)
    p.add_argument("--observable", default="I_AB")
    p.add_argument("--param", default="p_y")
    p.add_argument("--pc-box", dest="pc_box", required=True)
    p.add_argument("--nu-box", dest="nu_box", required=True)
    p.add_argument("--out", default=None)
    args = ap.parse_args(argv)

    try:
        if args.cmd in ("run", "sweep"):
            cfg = load_config(args.config)
            if args.seed is not None:
                cfg.seed = args.seed
                cfg.raw_text += f"\nseed = {args.seed}"
            return cmd_run(cfg, args.out, args.workers) if args.cmd == "run" \
                else cmd_sweep(cfg, args.out, args.workers)
        if args.cmd == "verify":
            return cmd_verify(args.suite, args.out)
        return cmd_collapse(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # runtime failure
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

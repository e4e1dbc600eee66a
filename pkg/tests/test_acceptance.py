"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Tolerances are pinned here, verbatim from the contract. The percolation
collapse asserts the rescaling exponent 1/nu = 0.75 +- 0.15: the source
quotes "3/4" for a transition it itself identifies as 2D bond percolation
(correlation exponent 4/3), and the measured slope growth L^{~0.7} confirms
that the quoted number is the exponent multiplying the argument, i.e. 1/nu
in the collapse form used here (see the decisions ledger).
"""

import json
import math
import os
import time

import numpy as np
import psutil
import pytest

from conftest import record
from isingboundary import boundary as bnd
from isingboundary import ising
from isingboundary import lattice as lat
from isingboundary import oracle as orc
from isingboundary import stabilizer as stab
from isingboundary.analysis import collapse, log_sine_fit, phase_classify
from isingboundary.measure import (Direction, MeasurementLayout, Weight, direction_weight,
                                   hadamard_weight, local_state, outcome_weight,
                                   sample_layout)
from isingboundary.mps import (CompressionPolicy, OperatorTrain, apply_ot, fidelity,
                               prefix_renyi2, tt_overlap)
from isingboundary.runners import AngleJob, pool_map, run_angle_trajectory

LN2 = math.log(2)
WORKERS = min(2, psutil.cpu_count() or 1)
ARTIFACTS = os.path.join(os.path.dirname(__file__), "_artifacts")
os.makedirs(ARTIFACTS, exist_ok=True)

HALF_PI = math.pi / 2


def _engine_states(spec, cl):
    st, _ = orc.dense_boundary(spec, cl)
    vd = st.amps / np.linalg.norm(st.amps)
    tt, _ = bnd.evolve(spec, cl)
    tc, _ = bnd.run_circuit(spec, cl)
    return vd, tt, tc, st


def test_engine_triangle_equivalence():
    t0 = time.monotonic()
    worst_fid = 0.0
    worst_ent = 0.0
    cases = [(lat.LatticeSpec("square", 4, 4), 20),
             (lat.LatticeSpec("lieb", 3, 2, bottom="smooth"), 10),
             (lat.LatticeSpec("lieb", 3, 2, bottom="rough"), 10)]
    for spec, n_layouts in cases:
        layout = MeasurementLayout(theta_o=0.8, phi_o=0.9, theta_b=1.3, phi_b=4.0,
                                   policy="random", seed=42)
        for traj in range(n_layouts):
            cl = sample_layout(layout, spec, traj)
            vd, tt, tc, st = _engine_states(spec, cl)
            va, vb = tt.dense_normalized(), tc.dense_normalized()
            for u, v in ((vd, va), (vd, vb), (va, vb)):
                worst_fid = max(worst_fid, 1.0 - abs(np.vdot(u, v)) ** 2)
            for c in range(1, len(st.qubits)):
                s_dense = orc.dense_renyi2(st, st.qubits[:c])
                worst_ent = max(worst_ent,
                                abs(prefix_renyi2(tt, c) - s_dense),
                                abs(prefix_renyi2(tc, c) - s_dense))
    dt = time.monotonic() - t0
    ok = worst_fid <= 1e-10 and worst_ent <= 1e-8 and dt < 30.0
    record("engine-triangle", ok,
           f"worst infidelity {worst_fid:.2e} (<=1e-10), worst entropy dev "
           f"{worst_ent:.2e} (<=1e-8), runtime {dt:.1f}s (<30s)")
    assert worst_fid <= 1e-10
    assert worst_ent <= 1e-8
    assert dt < 30.0


def test_partition_function_identity():
    results = {}
    for name, spec in (("lieb32", lat.LatticeSpec("lieb", 3, 2)),
                       ("square33", lat.LatticeSpec("square", 3, 3))):
        layout = MeasurementLayout(theta_o=0.7, phi_o=0.3, theta_b=1.1, phi_b=5.1,
                                   policy="random", seed=7)
        Wb = {b.index: Weight.of(0.3 + 0.2j) for b in lat.boundary_sites(spec)}
        dense_ratio, tt_ratio = [], []
        for traj in range(50):
            cl = sample_layout(layout, spec, traj)
            weights = cl.weights()
            weights.update(Wb)
            model = ising.cluster_to_ising(spec, weights)
            Z = ising.brute_force_Z(model)
            logmag, phase = ising.scale_product(model)
            denom = abs(Z) * math.exp(logmag)
            sc = orc.full_projection_scalar(spec, cl, Wb)
            dense_ratio.append(abs(sc) / denom)
            tt, _ = bnd.evolve(spec, cl)
            bras = [local_state(Wb[b.index]) for b in lat.boundary_sites(spec)]
            tt_ratio.append(abs(tt_overlap(tt, bras)) / denom)
        for tag, arr in (("dense", dense_ratio), ("tt", tt_ratio)):
            arr = np.array(arr)
            results[f"{name}/{tag}"] = float(np.std(arr) / arr.mean())
    worst = max(results.values())
    ok = worst < 1e-8
    record("partition-identity", ok,
           "rel std of |overlap|/(scale*|Z|): " +
           ", ".join(f"{k}={v:.2e}" for k, v in results.items()) + " (<1e-8)")
    assert ok


def _ring_cluster_group(n):
    t = stab.Tableau(n)
    for q in range(n):
        t.h(q)
    for q in range(n):
        t.cz(q, (q + 1) % n)
    return t.stabilizer_group_on(list(range(n)))


def _chain_cluster_group(n):
    t = stab.Tableau(n)
    for q in range(n):
        t.h(q)
    for q in range(n - 1):
        t.cz(q, q + 1)
    return t.stabilizer_group_on(list(range(n)))


def test_exact_stabilizer_limits():
    fails = []
    # all-Z square bulk: boundary is the chain cluster state up to Paulis
    for spec, ref in ((lat.LatticeSpec("square", 6, 6), _chain_cluster_group(6)),
                      (lat.LatticeSpec("square", 8, 6, x_periodic=True), _ring_cluster_group(8))):
        for seed in range(3):  # Born outcomes differ per seed; group must not
            res = stab.sliding_run(spec, assignment=np.array(["Z"] * lat.site_count(spec)),
                                   seed=seed)
            got = res.tableau.stabilizer_group_on(res.boundary_cols)
            if not np.array_equal(got, ref):
                fails.append(f"allZ square periodic={spec.x_periodic} seed={seed}")
    # Lieb all-X rough: zero entropy everywhere (exactly)
    spec = lat.LatticeSpec("lieb", 6, 4, x_periodic=True, bottom="rough")
    res = stab.sliding_run(spec, assignment=np.array(["X"] * lat.site_count(spec)), seed=0)
    if any(res.entropy_interval(s, la) != 0.0
           for la in range(1, res.ring) for s in range(res.ring)):
        fails.append("allX rough not product")
    # Lieb all-X smooth: ln 2 for every vertex-proper contiguous interval
    spec = lat.LatticeSpec("lieb", 6, 4, x_periodic=True, bottom="smooth")
    res = stab.sliding_run(spec, assignment=np.array(["X"] * lat.site_count(spec)), seed=0)
    ring = res.ring
    for start in range(ring):
        for la in range(1, ring):
            cols = [(start + k) % ring for k in range(la)]
            n_vertices = sum(1 for c in cols if c % 2 == 0)  # even slots are vertices
            want = LN2 if 0 < n_vertices < spec.Lx else 0.0
            if res.entropy_interval(start, la) != want:
                fails.append(f"allX smooth start={start} la={la}")
    ok = not fails
    record("stabilizer-limits", ok,
           "all-Z chain-cluster group equality, all-X product/GHZ entropies exact"
           + ("" if ok else f"; FAILS: {fails[:4]}"))
    assert ok, fails


def test_povm_and_algebra_suites():
    rng = np.random.default_rng(2)
    worst_povm = 0.0
    worst_inv = 0.0
    worst_complete = 0.0
    for _ in range(100):
        th, ph = rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi)
        mp, mm = bnd.weak_meas_kraus(th, ph)
        worst_povm = max(worst_povm, np.abs(mp.conj().T @ mp + mm.conj().T @ mm
                                            - np.eye(2)).max())
        z = complex(rng.normal(), rng.normal())
        back = hadamard_weight(hadamard_weight(Weight.of(z)))
        worst_inv = max(worst_inv, abs(back.value - z) / max(1.0, abs(z)))
        w = direction_weight(Direction(th, ph))
        plus = local_state(outcome_weight(w, +1))
        minus = local_state(outcome_weight(w, -1))
        proj = np.outer(plus, plus.conj()) + np.outer(minus, minus.conj())
        worst_complete = max(worst_complete, np.abs(proj - np.eye(2)).max())
    # truncation certificates on <= 10 sites
    from isingboundary.mps import TensorTrain
    rngm = np.random.default_rng(3)
    cert_ok = True
    for _ in range(8):
        tensors = []
        left = 1
        for k in range(9):
            right = 1 if k == 8 else min(6, 2 ** min(k + 1, 8 - k))
            tensors.append(rngm.normal(size=(left, 2, right))
                           + 1j * rngm.normal(size=(left, 2, right)))
            left = right
        tt = TensorTrain(tensors)
        tt.canonicalize(0)
        tt.normalize()
        ot_tensors = []
        left = 1
        for k in range(9):
            right = 1 if k == 8 else 2
            ot_tensors.append(rngm.normal(size=(left, 2, 2, right)))
            left = right
        ot = OperatorTrain(ot_tensors)
        exact, _ = apply_ot(tt, ot, CompressionPolicy(epsilon=0.0, renormalize=False))
        trunc, diag = apply_ot(tt, ot, CompressionPolicy(epsilon=3e-3, renormalize=False))
        infid = 1 - fidelity(exact, trunc)
        cert_ok = cert_ok and (diag.discarded >= infid - 1e-12)
    ok = worst_povm <= 1e-12 and worst_inv <= 1e-9 and worst_complete <= 1e-12 and cert_ok
    record("povm-algebra", ok,
           f"POVM closure {worst_povm:.2e} (<=1e-12), involution {worst_inv:.2e}, "
           f"completeness {worst_complete:.2e} (<=1e-12), certificates "
           f"{'bound infidelity' if cert_ok else 'VIOLATED'}")
    assert ok


@pytest.fixture(scope="module")
def percolation_dataset():
    grid = [round(0.455 + 0.005 * k, 4) for k in range(19)]
    mixes = [stab.PauliMix(p, 0.0, round(1.0 - p, 6)) for p in grid]
    ds = stab.sweep("xvertex", "lieb", mixes, [32, 64, 128], n_traj=300, seed=1234,
                    region_frac=0.25, ly_factor=2, workers=WORKERS)
    with open(os.path.join(ARTIFACTS, "percolation_sweep.csv"), "w") as fh:
        ds.to_csv(fh)
    return ds


@pytest.mark.slow
def test_percolation_criticality(percolation_dataset):
    t0 = time.monotonic()
    pts = [(r.L, r.p_x, r.mean) for r in percolation_dataset.rows if r.observable == "I_AB"]
    fit = collapse(pts, (0.46, 0.54), (0.9, 2.2))
    pc, nu = fit.params["p_c"], fit.params["nu"]
    inv_nu = 1.0 / nu
    # critical log coefficient at L = 128
    cuts = list(range(14, 115, 2))
    prof = stab.entropy_profile("xvertex", "lieb", stab.PauliMix(0.5, 0.0, 0.5),
                                128, cuts, n_traj=1500, seed=501, ly_factor=2,
                                workers=WORKERS)
    pts_k = [(int(r.region.split("=")[1]), r.mean / LN2) for r in prof.rows]
    kfit = log_sine_fit(pts_k, 128)
    K = 2 * kfit.params["a"]
    dt = time.monotonic() - t0
    ok = (abs(pc - 0.50) <= 0.02) and (abs(inv_nu - 0.75) <= 0.15) and (abs(K - 0.54) <= 0.08)
    record("percolation-criticality", ok,
           f"p_c={pc:.4f} (0.50+-0.02), rescaling exponent 1/nu={inv_nu:.3f} "
           f"(0.75+-0.15; nu={nu:.3f}, see ledger re source convention), "
           f"K={K:.3f} (0.54+-0.08), {dt/60:.1f} min (<20 min)")
    assert abs(pc - 0.50) <= 0.02
    assert abs(inv_nu - 0.75) <= 0.15
    assert abs(K - 0.54) <= 0.08
    assert dt < 20 * 60


def test_long_range_phase_exact_ln2():
    mix = stab.PauliMix(0.2, 0.0, 0.8)
    pair = stab.antipodal_regions(64, 0.25)
    bad = 0
    for t in range(100):
        res = stab.chain_xvertex_run(64, 128, mix=mix, seed=5, traj=t)
        if res.mutual_info(pair) != LN2:
            bad += 1
    record("long-range-phase", bad == 0,
           f"I_AB = ln2 exactly in {100 - bad}/100 trajectories at (0.2, 0, 0.8)")
    assert bad == 0


def _mean_half_entropy(jobs):
    out = pool_map(run_angle_trajectory, jobs, workers=WORKERS)
    return float(np.mean([o[0] for o in out])), max(o[1] for o in out)


@pytest.mark.slow
def test_angle_phase_classification():
    t0 = time.monotonic()
    details = []
    ok = True
    # square lattice, x-z plane, random outcomes
    for theta_frac, want in ((0.3, "area"), (0.9, "volume")):
        series = []
        for Lx in (6, 8, 10, 12, 14):
            n_traj = 20 if Lx < 14 else 12
            jobs = [AngleJob(kind="square", Lx=Lx, Ly=100, theta=theta_frac * HALF_PI,
                             policy="random", seed=42, traj=t) for t in range(n_traj)]
            s, _ = _mean_half_entropy(jobs)
            series.append((Lx, s))
        got = phase_classify(series).model
        ok = ok and got == want
        details.append(f"square theta={theta_frac}(pi/2) -> {got} (want {want})")
    # Lieb lattice, x-z plane: area law for every angle
    lieb_all_area = True
    for theta_frac in (0.1, 0.3, 0.5, 0.7, 0.9):
        series = []
        for Lx in (6, 8, 10, 12, 14):
            jobs = [AngleJob(kind="lieb", Lx=Lx, Ly=100, theta=theta_frac * HALF_PI,
                             policy="random", bottom="rough", seed=11, traj=t)
                    for t in range(24)]
            s, _ = _mean_half_entropy(jobs)
            series.append((Lx, s))
        got = phase_classify(series).model
        lieb_all_area = lieb_all_area and got == "area"
        if got != "area":
            details.append(f"lieb theta={theta_frac} -> {got} (want area)")
    ok = ok and lieb_all_area
    if lieb_all_area:
        details.append("lieb x-z: area at all angles")
    # random-sign coupling layouts with forced + outcomes: area on both lattices
    for kind in ("square", "lieb"):
        series = []
        for Lx in (6, 8, 10, 12, 14):
            jobs = [AngleJob(kind=kind, Lx=Lx, Ly=64, theta=0.6 * HALF_PI,
                             policy="forced+", sign_randomize=True,
                             bottom="smooth" if kind == "square" else "rough",
                             seed=5, traj=t) for t in range(24)]
            s, _ = _mean_half_entropy(jobs)
            series.append((Lx, s))
        got = phase_classify(series).model
        ok = ok and got == "area"
        details.append(f"random-sign {kind} -> {got} (want area)")
    record("angle-phases", ok, "; ".join(details) + f"; {(time.monotonic()-t0)/60:.1f} min")
    assert ok, details


TABLE_FIXTURES = {"nu_yz": 1.3, "c_lieb": 3.05, "c_square": 1.6, "Delta_yz": 2.0}


@pytest.mark.slow
def test_pauli_mix_criticality_windows():
    t0 = time.monotonic()
    results = {}
    for name, kind, center, window in (("lieb", "lieb", 0.858, 0.03),
                                       ("square", "square", 0.743, 0.03)):
        grid = [round(center - 0.06 + 0.01 * k, 4) for k in range(13)]
        mixes = [stab.PauliMix(0.0, p, round(1.0 - p, 6)) for p in grid]
        ds = stab.sweep("bulk", kind, mixes, [32, 64, 128], n_traj=240, seed=88,
                        region_frac=0.125, bottom="rough", ly_factor=2,
                        workers=WORKERS)
        with open(os.path.join(ARTIFACTS, f"window_{name}.csv"), "w") as fh:
            ds.to_csv(fh)
        pts = [(r.L, r.p_y, r.mean) for r in ds.rows if r.observable == "I_AB"]
        fit = collapse(pts, (center - 0.05, center + 0.05), (0.8, 2.2))
        results[name] = fit.params
    with open(os.path.join(ARTIFACTS, "table_fixtures.json"), "w") as fh:
        json.dump({"reference": TABLE_FIXTURES,
                   "desk_scale_fits": results}, fh, indent=1, sort_keys=True)
    lieb_ok = abs(results["lieb"]["p_c"] - 0.858) <= 0.03 and 1.0 <= results["lieb"]["nu"] <= 1.6
    sq_ok = abs(results["square"]["p_c"] - 0.743) <= 0.03
    dt = time.monotonic() - t0
    record("pauli-mix-windows", lieb_ok and sq_ok,
           f"lieb p_c={results['lieb']['p_c']:.3f} (0.858+-0.03) "
           f"nu={results['lieb']['nu']:.2f} ([1.0,1.6]); "
           f"square p_c={results['square']['p_c']:.3f} (0.743+-0.03, "
           f"nu={results['square']['nu']:.2f}); table fixtures recorded; "
           f"{dt/60:.1f} min")
    assert lieb_ok and sq_ok


@pytest.mark.slow
def test_depth_decay_without_randomness():
    t0 = time.monotonic()
    curves = {}
    for policy in ("random", "forced+"):
        jobs = [AngleJob(kind="square", Lx=12, Ly=100, theta=0.85 * HALF_PI,
                         policy=policy, seed=17, traj=t, want_depth=True)
                for t in range(12)]
        out = pool_map(run_angle_trajectory, jobs, workers=WORKERS)
        curves[policy] = np.mean(np.array([o[2] for o in out]), axis=0)
    plateau = float(np.mean(curves["random"][70:]))
    forced = curves["forced+"]
    final = float(np.mean(forced[-10:]))
    # monotone-trending decay: negative least-squares slope past the initial rise
    rows = np.arange(20, len(forced))
    slope = np.polyfit(rows, forced[20:], 1)[0]
    ok = (slope <= 1e-4) and (final < 0.25 * plateau)
    dt = time.monotonic() - t0
    record("depth-decay", ok,
           f"forced final S={final:.3f} vs randomized plateau {plateau:.3f} "
           f"(<25% = {0.25*plateau:.3f}), late slope {slope:.2e} (<=0); {dt/60:.1f} min")
    assert ok

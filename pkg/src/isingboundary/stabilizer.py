"""Stabilizer-tableau engine: Clifford gates, Pauli measurements and the
row-sliding protocol for random Pauli bulk measurements.

Measured qubits are isolated and recycled, so a run holds only a few active
rows of the lattice at a time. Entropies come from the GF(2) rank of the
region-restricted stabilizer rows and are exact multiples of ln 2.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import lattice as lat
from ._tableau import (_chain_step, _cz_cols, _cz_many, _gcx_cols, _gcz_many,
                       _gh_col, _gmeasure, _gmeasure_free_1q, _gmeasure_x1,
                       _gmeasure_zz, _grank_region, _gs_col, _h_col, _isolate,
                       _measure, _region_rank, _rowsum_into, _s_col, _x_col, _z_col)

LN2 = math.log(2.0)

PAULI_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


@dataclass(frozen=True)
class PauliMix:
    p_x: float
    p_y: float
    p_z: float

    def __post_init__(self):
        for p in (self.p_x, self.p_y, self.p_z):
            if p < 0:
                raise ValueError("probabilities must be nonnegative")
        if abs(self.p_x + self.p_y + self.p_z - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1")


@dataclass(frozen=True)
class RegionPair:
    a_start: int
    a_len: int
    b_start: int
    b_len: int
    ring: int

    def intervals(self):
        A = [(self.a_start + k) % self.ring for k in range(self.a_len)]
        B = [(self.b_start + k) % self.ring for k in range(self.b_len)]
        if set(A) & set(B):
            raise ValueError("regions overlap")
        return A, B


def antipodal_regions(ring, frac):
    """Antipodal pair with |A| = |B| = ring * frac, A starting at 0."""
    la = int(round(ring * frac))
    return RegionPair(0, la, ring // 2, la, ring)


class Tableau:
    """n-qubit destabilizer/stabilizer tableau over packed uint64 words."""

    def __init__(self, n):
        self.n = n
        W = (n + 63) // 64
        self.xs = np.zeros((2 * n + 1, W), dtype=np.uint64)
        self.zs = np.zeros((2 * n + 1, W), dtype=np.uint64)
        self.rs = np.zeros(2 * n + 1, dtype=np.uint8)
        for q in range(n):
            self._set_bit(self.xs, q, q)          # destabilizer X_q
            self._set_bit(self.zs, n + q, q)      # stabilizer Z_q

    def _set_bit(self, arr, row, q):
        arr[row, q // 64] |= np.uint64(1) << np.uint64(q % 64)

    # gates -----------------------------------------------------------------
    def h(self, q):
        _h_col(self.xs, self.zs, self.rs, q)

    def s(self, q):
        _s_col(self.xs, self.zs, self.rs, q)

    def sdg(self, q):
        for _ in range(3):
            _s_col(self.xs, self.zs, self.rs, q)

    def sx(self, q):
        self.h(q); self.s(q); self.h(q)

    def x(self, q):
        _x_col(self.xs, self.zs, self.rs, q)

    def z(self, q):
        _z_col(self.xs, self.zs, self.rs, q)

    def cx(self, a, b):
        from ._tableau import _cx_cols
        _cx_cols(self.xs, self.zs, self.rs, a, b)

    def cz(self, a, b):
        _cz_cols(self.xs, self.zs, self.rs, a, b)

    def cz_many(self, pairs):
        if len(pairs):
            _cz_many(self.xs, self.zs, self.rs, np.asarray(pairs, dtype=np.int64))

    def zz_rot(self, a, b):
        """Clifford conjugation of exp(i pi/4 Z_a Z_b) (sign convention free)."""
        self.cx(a, b)
        self.s(b)
        self.cx(a, b)

    # measurements ----------------------------------------------------------
    def _pack_pauli(self, pauli):
        W = self.xs.shape[1]
        px = np.zeros(W, dtype=np.uint64)
        pz = np.zeros(W, dtype=np.uint64)
        for q, name in pauli:
            bx, bz = PAULI_BITS[name]
            if bx:
                px[q // 64] |= np.uint64(1) << np.uint64(q % 64)
            if bz:
                pz[q // 64] |= np.uint64(1) << np.uint64(q % 64)
        return px, pz

    def measure_pauli(self, pauli, rng=None, forced=None):
        """Measure a Pauli product given as [(qubit, 'X'|'Y'|'Z'), ...].

        Returns (outcome in {+1,-1}, deterministic flag). Forced outcomes on
        deterministic measurements must match or a ValueError is raised.
        """
        out, det, _ = self._measure_raw(pauli, rng, forced)
        value = 1 if out == 0 else -1
        if det and forced is not None and ((forced == -1) != (out == 1)):
            raise ValueError("forced outcome contradicts a deterministic measurement")
        return value, bool(det)

    def _measure_raw(self, pauli, rng=None, forced=None):
        px, pz = self._pack_pauli(pauli)
        if forced is not None:
            fbit, fflag = (1 if forced == -1 else 0), 1
            rand_bit = fbit
        else:
            fbit, fflag = 0, 0
            rand_bit = int(rng.integers(2)) if rng is not None else 0
        return _measure(self.xs, self.zs, self.rs, self.n, px, pz,
                        rand_bit, fbit, fflag)

    def measure_free(self, q, basis, rng=None, forced=None):
        """Measure qubit q in a Pauli basis, then isolate and reset it to |0>.

        The column is left holding a fresh +Z_q stabilizer so it can be
        reallocated. Returns the outcome in {+1,-1}.
        """
        out, det, pivot = self._measure_raw([(q, basis)], rng, forced)
        if det and forced is not None and ((forced == -1) != (out == 1)):
            raise ValueError("forced outcome contradicts a deterministic measurement")
        if det:
            # definite value: rotate the basis onto Z, kick to |+/-> and
            # remeasure (the throwaway outcome is pinned to keep runs
            # deterministic) so the random-branch isolation applies
            self._rotate_to_z(q, basis)
            self.h(q)
            _, _, pivot = self._measure_raw([(q, "Z")], None, None)
        else:
            self._rotate_to_z(q, basis)
        _isolate(self.xs, self.zs, self.rs, q, pivot)
        return 1 if out == 0 else -1

    def _rotate_to_z(self, q, basis):
        if basis == "X":
            self.h(q)
        elif basis == "Y":
            self.sdg(q)
            self.h(q)

    def alloc_plus(self, q):
        """Reset column q (must be isolated |0>) to |+>."""
        self.h(q)

    # observables -----------------------------------------------------------
    def entropy(self, region):
        """Renyi-independent entanglement entropy of the region, in nats."""
        cols = np.asarray(sorted(set(region)), dtype=np.int64)
        if len(cols) == 0:
            return 0.0
        rank = _region_rank(self.xs, self.zs, self.n, cols)
        return (int(rank) - len(cols)) * LN2

    def mutual_info(self, region_a, region_b):
        sa = self.entropy(region_a)
        sb = self.entropy(region_b)
        sab = self.entropy(list(region_a) + list(region_b))
        return sa + sb - sab

    # inspection ------------------------------------------------------------
    def row_bits(self, row, cols):
        """(x, z) bit arrays of one row over the given columns."""
        xs = [(int(self.xs[row, q // 64]) >> (q % 64)) & 1 for q in cols]
        zs = [(int(self.zs[row, q // 64]) >> (q % 64)) & 1 for q in cols]
        return np.array(xs, dtype=np.uint8), np.array(zs, dtype=np.uint8)

    def stabilizer_group_on(self, cols):
        """Row-reduced (x|z) matrix of stabilizers supported inside `cols`.

        Canonical mod phases, so two states match up to Pauli frames iff the
        returned matrices are equal.
        """
        cols = list(cols)
        inside = []
        colset = set(cols)
        for row in range(self.n, 2 * self.n):
            support = []
            ok = True
            for q in range(self.n):
                xb = (int(self.xs[row, q // 64]) >> (q % 64)) & 1
                zb = (int(self.zs[row, q // 64]) >> (q % 64)) & 1
                if xb or zb:
                    if q not in colset:
                        ok = False
                        break
            if ok:
                x, z = self.row_bits(row, cols)
                inside.append(np.concatenate([x, z]))
        if not inside:
            return np.zeros((0, 2 * len(cols)), dtype=np.uint8)
        mat = np.array(inside, dtype=np.uint8)
        return _rref(mat)

    def verify_symplectic(self):
        """Debug invariant: destabilizer/stabilizer pairing is canonical."""
        n = self.n
        for i in range(2 * n):
            for j in range(i, 2 * n):
                xi, zi = self.row_bits(i, range(n))
                xj, zj = self.row_bits(j, range(n))
                sym = int(np.sum(xi & zj) + np.sum(zi & xj)) % 2
                expect = 1 if abs(i - j) == n else 0
                if sym != expect:
                    return False
        return True


def _rref(mat):
    mat = mat.copy() % 2
    rows, cols = mat.shape
    r = 0
    for c in range(cols):
        piv = None
        for k in range(r, rows):
            if mat[k, c]:
                piv = k
                break
        if piv is None:
            continue
        mat[[r, piv]] = mat[[piv, r]]
        for k in range(rows):
            if k != r and mat[k, c]:
                mat[k] ^= mat[r]
        r += 1
        if r == rows:
            break
    return mat[:r]


class GroupTableau:
    """Stabilizer group only: no phases, no destabilizers.

    Random-outcome measurements update the group identically for either
    sign and deterministic ones not at all, so entanglement observables
    computed here match the full tableau exactly (cross-checked in tests)
    at a fraction of the cost. Used by the sweep engines.
    """

    BASIS_CODE = {"X": 0, "Y": 1, "Z": 2}

    def __init__(self, n):
        self.n = n
        W = (n + 63) // 64
        self.xs = np.zeros((n, W), dtype=np.uint64)
        self.zs = np.zeros((n, W), dtype=np.uint64)
        for q in range(n):
            self.zs[q, q // 64] |= np.uint64(1) << np.uint64(q % 64)

    def alloc_plus(self, q):
        _gh_col(self.xs, self.zs, q)

    def cz_many(self, pairs):
        if len(pairs):
            _gcz_many(self.xs, self.zs, np.asarray(pairs, dtype=np.int64))

    def cz(self, a, b):
        self.cz_many([(a, b)])

    def cx(self, a, b):
        _gcx_cols(self.xs, self.zs, a, b)

    def measure_free(self, q, basis, rng=None, forced=None):
        if forced is not None:
            raise ValueError("group-only tableau cannot honour forced outcomes")
        _gmeasure_free_1q(self.xs, self.zs, q, self.BASIS_CODE[basis])

    def entropy(self, region):
        cols = np.asarray(sorted(set(region)), dtype=np.int64)
        if len(cols) == 0:
            return 0.0
        rank = _grank_region(self.xs, self.zs, cols)
        return (int(rank) - len(cols)) * LN2

    def mutual_info(self, region_a, region_b):
        return (self.entropy(region_a) + self.entropy(region_b)
                - self.entropy(list(region_a) + list(region_b)))


def apply_clifford(t, gate, sites):
    """Dispatch H/S/CZ (plus X/Z/CX) onto the tableau."""
    name = gate.upper()
    if name == "H":
        t.h(sites[0])
    elif name == "S":
        t.s(sites[0])
    elif name == "CZ":
        t.cz(sites[0], sites[1])
    elif name == "CX":
        t.cx(sites[0], sites[1])
    elif name == "X":
        t.x(sites[0])
    elif name == "Z":
        t.z(sites[0])
    else:
        raise ValueError(f"unsupported gate {gate!r}")
    return t


def draw_paulis(spec, mix, seed, traj=0):
    """Per-site Pauli assignment drawn in site-enumeration order."""
    rng = np.random.Generator(np.random.Philox(key=seed).jumped(traj))
    n = lat.site_count(spec)
    u = rng.random(n)
    names = np.empty(n, dtype="U1")
    for i in range(n):
        if u[i] < mix.p_x:
            names[i] = "X"
        elif u[i] < mix.p_x + mix.p_y:
            names[i] = "Y"
        else:
            names[i] = "Z"
    return names, rng


class SlidingResult:
    def __init__(self, tableau, boundary_cols):
        self.tableau = tableau
        self.boundary_cols = list(boundary_cols)

    @property
    def ring(self):
        return len(self.boundary_cols)

    def entropy_interval(self, start, length):
        cols = [self.boundary_cols[(start + k) % self.ring] for k in range(length)]
        return self.tableau.entropy(cols)

    def mutual_info(self, pair):
        A, B = pair.intervals()
        return self.tableau.mutual_info([self.boundary_cols[k] for k in A],
                                        [self.boundary_cols[k] for k in B])


def _measure_bulk(t, col, name, rng, forced):
    if name == "Y":
        t.measure_free(col, "Y", rng=rng, forced=forced)
    elif name == "X":
        t.measure_free(col, "X", rng=rng, forced=forced)
    else:
        t.measure_free(col, "Z", rng=rng, forced=forced)


def sliding_run(spec, mix=None, seed=0, traj=0, assignment=None, x_vertices=False,
                forced=None, group_only=False):
    """Row-sliding evolution with random (or given) Pauli bulk measurements.

    Entangles one fresh row at a time, measures the completed row and
    recycles its qubits. `assignment` overrides the drawn per-site Paulis;
    x_vertices forces every vertex (Lieb) to an X measurement including the
    top row, leaving a boundary of edge qubits only. Outcomes follow the
    Born rule unless `forced` is +/-1. group_only swaps in the phase-free
    tableau (entropy observables only, no forced outcomes).
    """
    if mix is None and assignment is None:
        raise ValueError("need a PauliMix or an explicit assignment")
    if assignment is None:
        names, rng = draw_paulis(spec, mix, seed, traj)
    else:
        names = assignment
        rng = np.random.Generator(np.random.Philox(key=seed).jumped(traj))
    lk = lat.site_lookup(spec)
    tableau_cls = GroupTableau if group_only else Tableau

    def pauli_of(site):
        if x_vertices and site.role == lat.VERTEX:
            return "X"
        return str(names[site.index])

    if spec.kind == lat.SQUARE:
        n_max = 2 * spec.Lx + 1
        t = tableau_cls(n_max)
        cols = {}
        free = list(range(n_max))

        def alloc_row(y):
            for x in range(spec.Lx):
                c = free.pop()
                t.alloc_plus(c)
                cols[(x, y)] = c
            n_h = spec.Lx if spec.x_periodic else spec.Lx - 1
            t.cz_many([(cols[(x, y)], cols[((x + 1) % spec.Lx, y)]) for x in range(n_h)])

        alloc_row(1)
        for y in range(1, spec.Ly):
            alloc_row(y + 1)
            t.cz_many([(cols[(x, y)], cols[(x, y + 1)]) for x in range(spec.Lx)])
            for x in range(spec.Lx):
                site = lk[(x, y, lat.PLAIN)]
                c = cols.pop((x, y))
                _measure_bulk(t, c, pauli_of(site), rng, forced)
                free.append(c)
        boundary = [cols[(x, spec.Ly)] for x in range(spec.Lx)]
        return SlidingResult(t, boundary)

    # Lieb lattice
    n_max = 3 * spec.Lx + 2
    t = tableau_cls(n_max)
    free = list(range(n_max))
    vcols, hcols = {}, {}

    def alloc_vertices(y):
        for x in range(spec.Lx):
            c = free.pop()
            t.alloc_plus(c)
            vcols[(x, y)] = c

    def alloc_hedges(y):
        n_h = spec.Lx if spec.x_periodic else spec.Lx - 1
        for x in range(n_h):
            c = free.pop()
            t.alloc_plus(c)
            hcols[(x, y)] = c
            t.cz(c, vcols[(x, y)])
            t.cz(c, vcols[((x + 1) % spec.Lx, y)])

    alloc_vertices(1)
    if spec.bottom == "rough":
        for x in range(spec.Lx):
            c = free.pop()
            t.alloc_plus(c)
            t.cz(c, vcols[(x, 1)])
            site = lk[(x, 0, lat.VEDGE)]
            _measure_bulk(t, c, pauli_of(site), rng, forced)
            free.append(c)
    alloc_hedges(1)
    for y in range(1, spec.Ly):
        alloc_vertices(y + 1)
        for x in range(spec.Lx):
            c = free.pop()
            t.alloc_plus(c)
            t.cz(c, vcols[(x, y)])
            t.cz(c, vcols[(x, y + 1)])
            site = lk[(x, y, lat.VEDGE)]
            _measure_bulk(t, c, pauli_of(site), rng, forced)
            free.append(c)
        for x in range(spec.Lx):
            site = lk[(x, y, lat.VERTEX)]
            c = vcols.pop((x, y))
            _measure_bulk(t, c, pauli_of(site), rng, forced)
            free.append(c)
        n_h = spec.Lx if spec.x_periodic else spec.Lx - 1
        for x in range(n_h):
            site = lk[(x, y, lat.HEDGE)]
            c = hcols.pop((x, y))
            _measure_bulk(t, c, pauli_of(site), rng, forced)
            free.append(c)
        alloc_hedges(y + 1)

    if x_vertices:
        for x in range(spec.Lx):
            c = vcols.pop((x, spec.Ly))
            t.measure_free(c, "X", rng=rng, forced=forced)
            free.append(c)
        n_h = spec.Lx if spec.x_periodic else spec.Lx - 1
        boundary = [hcols[(x, spec.Ly)] for x in range(n_h)]
        return SlidingResult(t, boundary)
    boundary = []
    n_h = spec.Lx if spec.x_periodic else spec.Lx - 1
    for x in range(spec.Lx):
        boundary.append(vcols[(x, spec.Ly)])
        if x < n_h:
            boundary.append(hcols[(x, spec.Ly)])
    return SlidingResult(t, boundary)


def _one_point(args):
    (model, lattice_kind, L, mix, seed, point_index, traj, region_frac,
     bottom, ly_factor) = args
    if model == "xvertex":
        ring = L
        res = chain_xvertex_run(L, ly_factor * L, mix=mix, seed=seed + point_index,
                                traj=traj, bottom=bottom)
    else:
        Lx = L if lattice_kind == lat.SQUARE else L // 2
        spec = lat.LatticeSpec(lattice_kind, Lx, ly_factor * Lx, x_periodic=True,
                               bottom=bottom if lattice_kind == lat.LIEB else "smooth")
        res = sliding_run(spec, mix=mix, seed=seed + point_index, traj=traj, group_only=True)
        ring = res.ring
    pair = antipodal_regions(ring, region_frac)
    s_half = res.entropy_interval(0, ring // 2)
    mi = res.mutual_info(pair)
    return s_half, mi


def sweep(model, lattice_kind, mixes, L_list, n_traj=300, seed=0, region_frac=None,
          bottom="rough", ly_factor=2, workers=1, progress=None):
    """Trajectory-averaged S(L/2) and I_AB over a grid of Pauli mixes.

    model: "bulk" (all bulk sites follow the mix) or "xvertex" (vertices
    pinned to X, reduced chain engine). L is the boundary ring length.
    Returns an analysis.ScalingDataset; deterministic per (point, traj).
    """
    from .analysis import ScalingDataset

    if region_frac is None:
        region_frac = 0.25 if model == "xvertex" else 0.125
    ds = ScalingDataset()
    jobs = []
    for L in L_list:
        for pi, mix in enumerate(mixes):
            jobs.append((L, pi, mix))
    from .runners import pool_map

    for L, pi, mix in jobs:
        args = [(model, lattice_kind, L, mix, seed, pi, t, region_frac, bottom, ly_factor)
                for t in range(n_traj)]
        out = pool_map(_one_point, args, workers=workers)
        s_vals = np.array([o[0] for o in out])
        mi_vals = np.array([o[1] for o in out])
        ring = L
        pair = antipodal_regions(ring, region_frac)
        region = (f"A={pair.a_start}:{pair.a_start+pair.a_len};"
                  f"B={pair.b_start}:{pair.b_start+pair.b_len}")
        for obs, vals, reg in (("S_half", s_vals, f"LA={ring//2}"), ("I_AB", mi_vals, region)):
            ds.add(lattice=lattice_kind, kind=model, L=L, p_x=mix.p_x, p_y=mix.p_y,
                   p_z=mix.p_z, observable=obs, region=reg,
                   mean=float(np.mean(vals)), sem=float(np.std(vals) / math.sqrt(len(vals))),
                   n_traj=n_traj, seed=seed)
        if progress is not None:
            progress(L, mix)
    return ds


def _profile_point(args):
    model, lattice_kind, L, mix, seed, traj, bottom, ly_factor, cuts = args
    if model == "xvertex":
        res = chain_xvertex_run(L, ly_factor * L, mix=mix, seed=seed, traj=traj, bottom=bottom)
    else:
        Lx = L if lattice_kind == lat.SQUARE else L // 2
        spec = lat.LatticeSpec(lattice_kind, Lx, ly_factor * Lx, x_periodic=True,
                               bottom=bottom if lattice_kind == lat.LIEB else "smooth")
        res = sliding_run(spec, mix=mix, seed=seed, traj=traj, group_only=True)
    return [res.entropy_interval(0, c) for c in cuts]


def entropy_profile(model, lattice_kind, mix, L, cuts, n_traj=300, seed=0,
                    bottom="rough", ly_factor=2, workers=1):
    """Mean S(L_A) over prefix intervals for the log-coefficient fits."""
    from .analysis import ScalingDataset

    from .runners import pool_map

    cuts = list(cuts)
    args = [(model, lattice_kind, L, mix, seed, t, bottom, ly_factor, cuts)
            for t in range(n_traj)]
    out = pool_map(_profile_point, args, workers=workers)
    arr = np.array(out)
    ds = ScalingDataset()
    for i, c in enumerate(cuts):
        ds.add(lattice=lattice_kind, kind=model, L=L, p_x=mix.p_x, p_y=mix.p_y, p_z=mix.p_z,
               observable="S_A", region=f"LA={c}", mean=float(arr[:, i].mean()),
               sem=float(arr[:, i].std() / math.sqrt(n_traj)), n_traj=n_traj, seed=seed)
    return ds


def chain_xvertex_run(L, Ly, mix=None, seed=0, traj=0, spatial=None, temporal=None,
                      dangling=None, bottom="rough"):
    """Reduced chain dynamics of the X-measured-vertex model on an L-ring.

    Per row: spatial slots measure X (prob p_x), rotate by a quarter X turn
    (p_y) or idle (p_z); temporal slots measure Z_{x-1} Z_x (p_z), rotate by
    a quarter ZZ turn (p_y) or idle (p_x). A rough bottom prepends one
    temporal row for the measured dangling edges acting on the fixed-spin
    (all |+>) initial chain; a smooth bottom starts from the even-sector
    superposition (Z_k Z_{k+1} and X-string stabilizers) with no dangling
    row. Explicit per-slot Pauli names in `spatial`/`temporal` (shape
    (Ly-1, L)) and `dangling` (length L) override the drawn mix. Validated
    exactly against sliding_run on the 2D lattice.
    """
    rng = np.random.Generator(np.random.Philox(key=seed).jumped(traj))
    t = GroupTableau(L)
    if bottom == "smooth":
        t.alloc_plus(0)
        for q in range(1, L):
            t.cx(0, q)
    else:
        for q in range(L):
            t.alloc_plus(q)
    if (spatial is None) != (temporal is None):
        raise ValueError("give both explicit slot tables or neither")

    code = {"X": 0, "Y": 1, "Z": 2}
    if spatial is None:
        u = rng.random((Ly, 2, L))
        codes = np.where(u < mix.p_x, 0, np.where(u < mix.p_x + mix.p_y, 1, 2)).astype(np.uint8)
        sp = codes[:Ly - 1, 0]
        tp = codes[:Ly - 1, 1]
        dang = codes[Ly - 1, 1]
    else:
        sp = np.array([[code[str(c)] for c in row] for row in spatial], dtype=np.uint8)
        tp = np.array([[code[str(c)] for c in row] for row in temporal], dtype=np.uint8)
        dang = (np.array([code[str(c)] for c in dangling], dtype=np.uint8)
                if dangling is not None else None)

    if bottom == "rough":
        if dang is None:
            raise ValueError("rough bottom requires a dangling row")
        _chain_step(t.xs, t.zs, np.full(L, 2, dtype=np.uint8), dang, L)
    for y in range(Ly - 1):
        _chain_step(t.xs, t.zs, sp[y], tp[y], L)
    return SlidingResult(t, list(range(L)))

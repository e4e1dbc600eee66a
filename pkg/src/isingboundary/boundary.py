"""Dynamic construction of the measured-bulk boundary state.

Two engines per lattice, built to disagree only by floating error:

  * square lattice: row-by-row tensor contraction (bottom tensors, rank-4 row
    operators, a final physical-leg row) and, independently, a gate circuit
    of weak measurements / CZ rows / Hadamard rows on the virtual chain;
  * Lieb lattice: the effective chain dynamics (diagonal link gates from
    horizontal-edge measurements, single-site weak measurements from vertex
    measurements, weak X factors from vertical-edge measurements), as a
    bond-2 operator train per row or as sequential gates, followed by an
    isometric insertion of the unmeasured top-row edge qubits.

Every measurement enters through the collapse vector N*(1, W)* with the
tagged infinity handled exactly, so Pauli-limit behaviour is exact and
outcome-dependent Paulis/phases ride along automatically.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import lattice as lat
from .measure import Direction, Weight, direction_weight, local_state, outcome_weight, hadamard_weight
from .mps import (CompressionPolicy, OperatorTrain, TensorTrain, apply_gate1, apply_gate2,
                  apply_ot, compress, prefix_renyi2, product_tt, tt_dot)

SQRT2 = math.sqrt(2.0)

# CZ component operators: diagonal, so a vertex tensor is a product of the
# per-leg diagonals d_sigma[n].
_D0 = np.array([SQRT2, 0.0], dtype=complex)
_D1 = np.array([1j, -1j], dtype=complex)

_H = np.array([[1, 1], [1, -1]], dtype=complex) / SQRT2
_CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)


def cz_factors():
    """The two 2x2 components whose pairwise products rebuild CZ."""
    O0 = np.diag(_D0)
    O1 = np.diag(_D1)
    return O0, O1


def vertex_tensor(k):
    """Site tensor with a physical leg plus k entangling legs, k in {2,3,4}.

    T[n, s1..sk] = (1/sqrt 2) * prod_j d_{sj}[n]; all components are diagonal
    so leg order is immaterial.
    """
    if k not in (2, 3, 4):
        raise ValueError(f"leg count must be 2, 3 or 4, got {k}")
    return _legs_tensor(k)


def _legs_tensor(k):
    t = np.ones((2,) + (1,) * k, dtype=complex) / SQRT2
    d = np.stack([_D0, _D1], axis=1)  # d[n, sigma]
    for j in range(k):
        shape = [1] * (k + 1)
        shape[0] = 2
        shape[j + 1] = 2
        t = t * d.reshape(tuple(shape))
    return t


def collapse_bra(W):
    """Row vector N*(1, W^*) contracted onto a physical leg (infinity exact)."""
    return np.conj(local_state(Weight.of(W)))


def measured_tensor(t, direction_or_W, mu=None):
    """Contract the physical leg with the collapse bra of (direction, outcome)."""
    if mu is None:
        W = Weight.of(direction_or_W)
    else:
        W = outcome_weight(direction_weight(direction_or_W), mu)
    bra = collapse_bra(W)
    return np.tensordot(bra, t, axes=(0, 0))


# ---------------------------------------------------------------------------
# square lattice: tensor path
# ---------------------------------------------------------------------------


def _square_weight(layout, lk, x, y):
    return layout.weight(lk[(x, y, lat.PLAIN)].index)


def bottom_mps(spec, layout):
    """Initial chain state from the measured bottom row (or Lieb bottom shape)."""
    if spec.kind == lat.SQUARE:
        lk = lat.site_lookup(spec)
        tensors = []
        for x in range(spec.Lx):
            legs = ["u"]
            if x > 0:
                legs.append("l")
            if x < spec.Lx - 1:
                legs.append("r")
            t = _legs_tensor(len(legs))  # [n, u, (l), (r)]
            m = measured_tensor(t, _square_weight(layout, lk, x, 1))
            # reorder to (l, u, r) with missing outer legs as size-1 axes
            if x == 0:
                m = m.reshape(1, 2, 2) if spec.Lx > 1 else m.reshape(1, 2, 1)
            elif x == spec.Lx - 1:
                m = np.moveaxis(m, 1, 0).reshape(2, 2, 1)
            else:
                m = np.moveaxis(m, 1, 0)  # (l, u, r)
            tensors.append(m)
        return TensorTrain(tensors)
    if spec.bottom == "smooth":
        v = np.array([1.0, 1.0], dtype=complex) / SQRT2
        return product_tt([v] * spec.Lx)
    # rough bottom: fixed phantom spin row, transferred through the measured
    # dangling edges (weak X factors applied to |0>)
    tt = product_tt([np.array([1.0, 0.0], dtype=complex)] * spec.Lx)
    lk = lat.site_lookup(spec)
    for x in range(spec.Lx):
        apply_gate1(tt, x, _weak_x(layout.weight(lk[(x, 0, lat.VEDGE)].index)))
    return tt


def row_mpo(spec, row, layout):
    """Rank-4 operator train transferring the chain across one measured row."""
    if not (2 <= row <= spec.Ly - 1) and spec.kind == lat.SQUARE:
        raise ValueError(f"row {row} is not a bulk transfer row")
    if spec.kind == lat.SQUARE:
        lk = lat.site_lookup(spec)
        tensors = []
        for x in range(spec.Lx):
            legs = ["u", "d"]
            if x > 0:
                legs.append("l")
            if x < spec.Lx - 1:
                legs.append("r")
            t = _legs_tensor(len(legs))
            m = measured_tensor(t, _square_weight(layout, lk, x, row))  # [u, d, (l), (r)]
            if x == 0:
                m = m.reshape(2, 2, 1, 2) if spec.Lx > 1 else m.reshape(2, 2, 1, 1)
                m = np.transpose(m, (2, 0, 1, 3))
            elif x == spec.Lx - 1:
                m = m.reshape(2, 2, 2, 1)
                m = np.transpose(m, (2, 0, 1, 3))
            else:
                m = np.transpose(m, (2, 0, 1, 3))  # (l, u, d, r)
            tensors.append(m)
        return OperatorTrain(tensors)
    return _lieb_row_mpo(spec, row, layout)


def top_row_ot(spec):
    """Final row mapping chain bonds onto the unmeasured boundary qubits (square)."""
    tensors = []
    for x in range(spec.Lx):
        legs = ["d"]
        if x > 0:
            legs.append("l")
        if x < spec.Lx - 1:
            legs.append("r")
        t = _legs_tensor(len(legs))  # [n, d, (l), (r)]
        if x == 0:
            m = t.reshape(2, 2, 1, 2) if spec.Lx > 1 else t.reshape(2, 2, 1, 1)
            m = np.transpose(m, (2, 0, 1, 3))
        elif x == spec.Lx - 1:
            m = t.reshape(2, 2, 2, 1)
            m = np.transpose(m, (2, 0, 1, 3))
        else:
            m = np.transpose(t, (2, 0, 1, 3))
        tensors.append(m)
    return OperatorTrain(tensors)


# ---------------------------------------------------------------------------
# Lieb lattice: effective chain dynamics
# ---------------------------------------------------------------------------


def lieb_link_gate(theta, phi, m):
    """Diagonal two-site gate (g+, g-, g-, g+) from a horizontal-link measurement.

    Built from the collapse vector, so the outcome-dependent overall phase of
    the m = -1 branch is fixed by that convention; every consumer compares
    states through fidelities or parity expectations, never raw phases.
    """
    c = collapse_bra(outcome_weight(direction_weight(Direction(theta, phi)), m))
    gp, gm = c[0] + c[1], c[0] - c[1]
    return np.diag([gp, gm, gm, gp])


def _link_gate_exact(W):
    c = collapse_bra(W)
    gp, gm = (c[0] + c[1]) / SQRT2, (c[0] - c[1]) / SQRT2
    return np.diag([gp, gm, gm, gp])


def _weak_z(W):
    return np.diag(collapse_bra(W))


def _weak_x(W):
    c = collapse_bra(W)
    return np.array([[c[0] + c[1], c[0] - c[1]], [c[0] - c[1], c[0] + c[1]]], dtype=complex) / SQRT2


def _lieb_row_ops(spec, row, layout):
    """(link gate per bond, weak-Z per column, weak-X per column) of one row."""
    lk = lat.site_lookup(spec)
    links, weakz, weakx = [], [], []
    for x in range(spec.Lx - 1):
        links.append(_link_gate_exact(layout.weight(lk[(x, row, lat.HEDGE)].index)))
    for x in range(spec.Lx):
        weakz.append(_weak_z(layout.weight(lk[(x, row, lat.VERTEX)].index)))
        weakx.append(_weak_x(layout.weight(lk[(x, row, lat.VEDGE)].index)))
    return links, weakz, weakx


def _lieb_row_mpo(spec, row, layout):
    """Bond-2 operator train: link gates, then weak-Z, then weak-X."""
    links, weakz, weakx = _lieb_row_ops(spec, row, layout)
    tensors = []
    for x in range(spec.Lx):
        ldim = 1 if x == 0 else 2
        rdim = 1 if x == spec.Lx - 1 else 2
        e = np.zeros((ldim, 2, 2, rdim), dtype=complex)
        for p in range(2):
            for a in range(ldim):
                g = 1.0 if x == 0 else links[x - 1][2 * a + p, 2 * a + p]
                val = g * weakz[x][p, p]
                if rdim == 2:
                    e[a, p, p, p] = val
                else:
                    e[a, p, p, 0] = val
        # left-multiply the weak-X factor on the output leg
        tensors.append(np.einsum("pq,aqjb->apjb", weakx[x], e, optimize=True))
    return OperatorTrain(tensors)


def lieb_top_insert(tt, policy=None):
    """Insert the unmeasured top-row edge qubits between chain sites.

    Maps |s_0 .. s_{L-1}> to the interleaved vertex/edge row with each edge
    qubit in the X eigenstate of eigenvalue s_x * s_{x+1}; an isometry, so
    entropies of vertex intervals survive untouched.
    """
    policy = policy or CompressionPolicy()
    n = tt.n_sites
    tt.move_center(0)
    tensors = []
    for x in range(n):
        a = tt.tensors[x]
        l, p, r = a.shape
        left_copy = x > 0
        right_copy = x < n - 1
        ldim = l * (2 if left_copy else 1)
        rdim = r * (2 if right_copy else 1)
        v = np.zeros((ldim, 2, rdim), dtype=complex)
        for bit in range(2):
            blk = a[:, bit, :]
            li = slice(bit * l, (bit + 1) * l) if left_copy else slice(0, l)
            ri = slice(bit * r, (bit + 1) * r) if right_copy else slice(0, r)
            v[li, bit, ri] = blk
        tensors.append(v)
        if right_copy:
            # copy-bit-major bond layout: left block cl carries s_x, right block
            # cr carries s_{x+1}; the original chain bond passes through as eye(r)
            e = np.zeros((rdim, 2, rdim), dtype=complex)
            for cl in range(2):
                for cr in range(2):
                    amp = np.array([1.0, 1.0 if (cl ^ cr) == 0 else -1.0]) / SQRT2
                    for pe in range(2):
                        e[cl * r: (cl + 1) * r, pe, cr * r: (cr + 1) * r] += amp[pe] * np.eye(r)
            tensors.append(e)
    out = TensorTrain(tensors, log_norm=tt.log_norm)
    out.discarded_total = tt.discarded_total
    compress(out, policy)
    return out


# ---------------------------------------------------------------------------
# circuit path
# ---------------------------------------------------------------------------


def weak_meas_kraus(theta, phi):
    """Kraus pair (M+, M-) of the weak measurement along (theta, phi)."""
    d = Direction(theta, phi)
    w = direction_weight(d)
    return (_weak_z(outcome_weight(w, +1)), _weak_z(outcome_weight(w, -1)))


def weak_projector(beta, sign):
    """P_(+/-)(beta) = (1 +/- tanh(beta) Z) / sqrt(2 (1 + tanh^2 beta))."""
    t = math.tanh(beta)
    pref = 1.0 / math.sqrt(2.0 * (1.0 + t * t))
    z = np.diag([1.0, -1.0])
    return pref * (np.eye(2) + sign * t * z)


def strength_of_angle(theta):
    """tanh(beta) = tan(pi/4 - theta/2); defined for theta in [0, pi/2]."""
    if not (0.0 <= theta <= math.pi / 2):
        raise ValueError("strength parametrization needs theta in [0, pi/2]")
    x = math.tan(math.pi / 4 - theta / 2)
    return math.atanh(x) if x < 1.0 else math.inf


@dataclass(frozen=True)
class WeakMeasSpec:
    beta: float
    outcome: int
    phi: float = 0.0

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("strength must be >= 0")
        if self.outcome not in (1, -1):
            raise ValueError("outcome must be +1 or -1")

    def kraus(self):
        m = weak_projector(self.beta, +1 if self.outcome == 1 else -1)
        rot = np.diag([cmath.exp(1j * self.phi / 2), cmath.exp(-1j * self.phi / 2)])
        z = np.diag([1.0, -1.0]) if self.outcome == -1 else np.eye(2)
        return rot @ z @ m


def circuit_layer(spec, row, layout):
    """Ordered gate list for one bulk row, in application order.

    Square: weak measurements, CZ row, Hadamard row. Lieb: link gates, weak
    measurements on vertices, weak X factors from the vertical links.
    """
    lk = lat.site_lookup(spec)
    gates = []
    if spec.kind == lat.SQUARE:
        for x in range(spec.Lx):
            gates.append(("M", (x,), _weak_z(layout.weight(lk[(x, row, lat.PLAIN)].index))))
        for x in range(spec.Lx - 1):
            gates.append(("CZ", (x, x + 1), _CZ))
        for x in range(spec.Lx):
            gates.append(("H", (x,), _H))
        return gates
    links, weakz, weakx = _lieb_row_ops(spec, row, layout)
    for x in range(spec.Lx - 1):
        gates.append(("G", (x, x + 1), links[x]))
    for x in range(spec.Lx):
        gates.append(("M", (x,), weakz[x]))
    for x in range(spec.Lx):
        gates.append(("WX", (x,), weakx[x]))
    return gates


def circuit_layer_uniform(theta, phi, outcomes):
    """One square-lattice layer for a uniform direction and given row outcomes.

    Application order: weak measurements M_mu, then the CZ row, then the
    Hadamard row (the operator product reads right to left).
    """
    w = direction_weight(Direction(theta, phi))
    n = len(outcomes)
    gates = []
    for x, mu in enumerate(outcomes):
        gates.append(("M", (x,), _weak_z(outcome_weight(w, mu))))
    for x in range(n - 1):
        gates.append(("CZ", (x, x + 1), _CZ))
    for x in range(n):
        gates.append(("H", (x,), _H))
    return gates


@dataclass
class RowDiagnostics:
    row: int
    max_bond: int
    discarded: float
    log_norm_delta: float
    cap_breached: bool = False
    entropies: dict = field(default_factory=dict)


def _record_row(tt, row, disc, delta, breached, cuts):
    ent = {}
    for c in cuts:
        if 1 <= c <= tt.n_sites - 1:
            ent[c] = prefix_renyi2(tt, c)
    return RowDiagnostics(row=row, max_bond=tt.max_bond(), discarded=disc,
                          log_norm_delta=delta, cap_breached=breached, entropies=ent)


def _engine_guard(spec):
    if spec.x_periodic:
        raise ValueError("chain evolution engines need an open spatial boundary")


def evolve(spec, layout, policy=None, cuts=None):
    """Tensor-path boundary evolution; returns (boundary train, row diagnostics)."""
    _engine_guard(spec)
    policy = policy or CompressionPolicy()
    cuts = list(cuts) if cuts is not None else [spec.Lx // 2]
    tt = bottom_mps(spec, layout)
    diags = []
    if spec.kind == lat.SQUARE:
        for row in range(2, spec.Ly):
            tt, d = apply_ot(tt, row_mpo(spec, row, layout), policy)
            diags.append(_record_row(tt, row, d.discarded, d.log_norm_delta, d.cap_breached, cuts))
        tt, d = apply_ot(tt, top_row_ot(spec), policy)
        diags.append(_record_row(tt, spec.Ly, d.discarded, d.log_norm_delta, d.cap_breached, cuts))
    else:
        for row in range(1, spec.Ly):
            tt, d = apply_ot(tt, _lieb_row_mpo(spec, row, layout), policy)
            diags.append(_record_row(tt, row, d.discarded, d.log_norm_delta, d.cap_breached, cuts))
        tt = lieb_top_insert(tt, policy)
        if policy.renormalize:
            tt.normalize()
        diags.append(_record_row(tt, spec.Ly, 0.0, 0.0, False, cuts))
    return tt, diags


def run_circuit(spec, layout, policy=None, cuts=None):
    """Gate-path boundary evolution (independent engine); same return shape."""
    _engine_guard(spec)
    policy = policy or CompressionPolicy()
    cuts = list(cuts) if cuts is not None else [spec.Lx // 2]
    diags = []
    if spec.kind == lat.SQUARE:
        plus = np.array([1.0, 1.0], dtype=complex) / SQRT2
        tt = product_tt([plus] * spec.Lx)
        for row in range(1, spec.Ly):
            before = tt.log_norm
            disc = 0.0
            for name, sites, mat in circuit_layer(spec, row, layout):
                if len(sites) == 1:
                    apply_gate1(tt, sites[0], mat)
                else:
                    disc += apply_gate2(tt, sites[0], mat, policy)
            if policy.renormalize:
                tt.normalize()
            diags.append(_record_row(tt, row, disc, tt.log_norm - before, False, cuts))
        disc = 0.0
        for x in range(spec.Lx - 1):
            disc += apply_gate2(tt, x, _CZ, policy)
        if policy.renormalize:
            tt.normalize()
        diags.append(_record_row(tt, spec.Ly, disc, 0.0, False, cuts))
        return tt, diags
    tt = bottom_mps(spec, layout)
    for row in range(1, spec.Ly):
        before = tt.log_norm
        disc = 0.0
        for name, sites, mat in circuit_layer(spec, row, layout):
            if len(sites) == 1:
                apply_gate1(tt, sites[0], mat)
            else:
                disc += apply_gate2(tt, sites[0], mat, policy)
        if policy.renormalize:
            tt.normalize()
        diags.append(_record_row(tt, row, disc, tt.log_norm - before, False, cuts))
    tt = lieb_top_insert(tt, policy)
    if policy.renormalize:
        tt.normalize()
    diags.append(_record_row(tt, spec.Ly, 0.0, 0.0, False, cuts))
    return tt, diags


# ---------------------------------------------------------------------------
# transfer gates (validation of the quantum-classical dictionary)
# ---------------------------------------------------------------------------

PROJECTOR = "projector"
PAULI = "pauli"
QUARTER = "quarter-rotation"
GENERIC = "generic"


def _classify(V):
    if V.is_inf:
        return PROJECTOR
    z = V.value
    for target, tag in ((0, PROJECTOR), (1, PAULI), (-1, PAULI), (1j, QUARTER), (-1j, QUARTER)):
        if abs(z - target) < 1e-12:
            return tag
    return GENERIC


@dataclass(frozen=True)
class GateTriple:
    t_zz: np.ndarray
    t_z: np.ndarray
    t_x: np.ndarray
    tags: dict


def _pair_matrix(V, parity_op):
    """(P_even + V P_odd) for the +/-1 eigenspaces of a Pauli product."""
    eye = np.eye(parity_op.shape[0], dtype=complex)
    if V.is_inf:
        return (eye - parity_op) / 2.0
    return (eye + parity_op) / 2.0 + V.value * (eye - parity_op) / 2.0


def transfer_gates(W_spatial, W_temporal, W_vertex):
    """Finite matrices for the row transfer factors, with limit tags.

    t_zz couples two neighbouring chain sites (base hadamard(W_spatial)); t_z
    is the longitudinal factor (base W_vertex); t_x acts on (site, left edge,
    right edge) in the spin-edge basis (base W_temporal). Built from factor
    pairs, never from diverging couplings.
    """
    Vs = hadamard_weight(Weight.of(W_spatial))
    Vv = Weight.of(W_vertex)
    Vt = Weight.of(W_temporal)
    z = np.diag([1.0, -1.0]).astype(complex)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    zz = np.kron(z, z)
    xzz = np.kron(x, np.kron(z, z))
    t_zz = _pair_matrix(Vs, zz)
    t_z = _pair_matrix(Vv, z)
    t_x = _pair_matrix(Vt, xzz)
    tags = {"t_zz": _classify(Vs), "t_z": _classify(Vv), "t_x": _classify(Vt)}
    return GateTriple(t_zz=t_zz, t_z=t_z, t_x=t_x, tags=tags)


def expectation_product(tt, ops):
    """<psi| prod_site ops[site] |psi> / <psi|psi> for single-site operators."""
    bra = tt.copy()
    ket = tt.copy()
    for site, mat in ops.items():
        apply_gate1(ket, site, mat)
    num = tt_dot(bra, ket)
    den = tt_dot(bra, bra)
    return num / den

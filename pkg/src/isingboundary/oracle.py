"""Dense state-vector reference engine for small systems.

Ground truth for every other engine: exact resource states, projective
contractions, boundary states, overlaps and Renyi-2 entropies. Qubit k of a
DenseState is axis k of the amplitude tensor (site order = enumeration
order), so bit k of a flat index sits at position n-1-k.
"""

import math

import numpy as np

from . import lattice as lat
from .measure import Weight, local_state, log_local_norm

DENSE_CAP = 26


class DenseState:
    """Amplitude vector over the currently alive qubits plus a log-norm tally."""

    def __init__(self, amps, qubits, log_norm=0.0):
        self.amps = np.asarray(amps, dtype=complex)
        self.qubits = list(qubits)  # site index per tensor axis
        self.log_norm = float(log_norm)

    @property
    def n_qubits(self):
        return len(self.qubits)

    def copy(self):
        return DenseState(self.amps.copy(), list(self.qubits), self.log_norm)

    def norm(self):
        return float(np.linalg.norm(self.amps))

    def normalize(self):
        """Fold the current amplitude norm into the log-norm accumulator."""
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize an annihilated state")
        self.amps /= nrm
        self.log_norm += math.log(nrm)
        return self

    def axis_of(self, site_index):
        return self.qubits.index(site_index)


def dense_cluster(spec):
    """Resource state: |+...+> with a -1 phase per entangled pair both-on."""
    sites = lat.enumerate_sites(spec)
    n = len(sites)
    if n > DENSE_CAP:
        raise ValueError(f"{n} qubits exceeds dense cap {DENSE_CAP}")
    idx = np.arange(1 << n, dtype=np.int64)
    signs = np.zeros(1 << n, dtype=np.int8)
    for (a, b) in lat.cz_pairs(spec, sites):
        both = ((idx >> (n - 1 - a)) & 1) & ((idx >> (n - 1 - b)) & 1)
        signs ^= both.astype(np.int8)
    amps = np.where(signs == 1, -1.0, 1.0).astype(complex) * (2.0 ** (-n / 2.0))
    return DenseState(amps, [s.index for s in sites])


def dense_project(state, site_index, W, conjugate=True, mutate=False):
    """Contract one qubit with the collapse bra; removes it from the register.

    The bra is N*(<0| + W*<1|) (or unconjugated when conjugate=False). The
    result is left unnormalized; call .normalize() to fold the norm into the
    accumulator.
    """
    st = state if mutate else state.copy()
    if site_index not in st.qubits:
        raise KeyError(f"site {site_index} already projected or unknown")
    ax = st.axis_of(site_index)
    n = st.n_qubits
    bra = np.conj(local_state(Weight.of(W), conjugate=not conjugate))
    # conj(local_state(conjugate=not conjugate)) == N*(1, W*) when conjugate=True
    t = st.amps.reshape((1 << ax, 2, 1 << (n - 1 - ax)))
    st.amps = (bra[0] * t[:, 0, :] + bra[1] * t[:, 1, :]).reshape(-1)
    st.qubits.pop(ax)
    return st


def dense_boundary(spec, layout, conjugate=True):
    """Project the full bulk; returns (normalized boundary state, log magnitude).

    The log magnitude is the pre-normalization scalar magnitude accumulated
    over all bulk projections.
    """
    st = dense_cluster(spec)
    for s in lat.bulk_sites(spec):
        dense_project(st, s.index, layout.weight(s.index), conjugate=conjugate, mutate=True)
        st.normalize()
    log_mag = st.log_norm
    boundary = [b.index for b in lat.boundary_sites(spec)]
    assert st.qubits == boundary
    return st, log_mag


def full_projection_scalar(spec, layout, weights_boundary=None, conjugate=True):
    """Project every site (bulk per layout, boundary per `weights_boundary`).

    Returns the complex overlap of the full product bra with the resource
    state, including every local normalization factor.
    """
    st = dense_cluster(spec)
    for s in lat.bulk_sites(spec):
        dense_project(st, s.index, layout.weight(s.index), conjugate=conjugate, mutate=True)
    for b in lat.boundary_sites(spec):
        dense_project(st, b.index, weights_boundary[b.index], conjugate=conjugate, mutate=True)
    assert st.amps.shape == (1,)
    return complex(st.amps[0]) * math.exp(st.log_norm)


def dense_renyi2(state, subsystem):
    """S2 = -ln tr rho_A^2 for the given site indices (must be alive)."""
    n = state.n_qubits
    nrm = state.norm()
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError(f"state not normalized (norm {nrm})")
    inside = sorted(state.qubits.index(s) for s in subsystem)
    outside = [k for k in range(n) if k not in inside]
    t = state.amps.reshape((2,) * n).transpose(inside + outside)
    m = t.reshape(1 << len(inside), 1 << len(outside))
    s = np.linalg.svd(m, compute_uv=False)
    p2 = float(np.sum(s ** 4))
    return -math.log(max(p2, 1e-300))


def dense_overlap(state_a, state_b):
    """<a|b> including both log-norm accumulators."""
    if state_a.qubits != state_b.qubits:
        raise ValueError("qubit registers differ")
    val = complex(np.vdot(state_a.amps, state_b.amps))
    return val * math.exp(state_a.log_norm + state_b.log_norm)


def spin_edge_amplitude(state, spec, spins):
    """Boundary amplitude in the spin-labeled basis (Lieb top row).

    `spins` maps top-row vertex x -> +/-1. Vertices are read in the Z basis,
    horizontal edges in the X basis with eigenvalue s_a * s_b.
    """
    st = state.copy()
    for b in lat.boundary_sites(spec):
        if b.role == lat.VERTEX:
            vec = np.array([1.0, 0.0]) if spins[b.x] == 1 else np.array([0.0, 1.0])
        else:
            par = spins[b.x] * spins[(b.x + 1) % spec.Lx]
            vec = np.array([1.0, par]) / math.sqrt(2.0)
        ax = st.axis_of(b.index)
        t = st.amps.reshape((1 << ax, 2, 1 << (st.n_qubits - 1 - ax)))
        st.amps = (vec[0] * t[:, 0, :] + vec[1] * t[:, 1, :]).reshape(-1)
        st.qubits.pop(ax)
    return complex(st.amps[0]) * math.exp(st.log_norm)

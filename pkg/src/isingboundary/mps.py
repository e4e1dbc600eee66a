"""Tensor-train engine with certified truncation.

TensorTrain holds per-site (left, phys=2, right) tensors, an orthogonality
center, a cumulative normalized discarded weight and a log-norm accumulator
(long evolutions under/overflow raw norms). Compression is one QR sweep to
the right followed by one truncating SVD sweep back; the per-sweep certified
quantity is the sum over bonds of the normalized discarded weight. Singular
values below 1e-14 of the largest are always dropped.
"""

import math
from dataclasses import dataclass

import numpy as np

NOISE_FLOOR = 1e-14


@dataclass
class CompressionPolicy:
    epsilon: float = 1e-9
    chi_max: int = None
    renormalize: bool = True

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")


@dataclass
class StepDiagnostics:
    max_bond: int
    discarded: float
    log_norm_delta: float
    cap_breached: bool = False


class TensorTrain:
    def __init__(self, tensors, log_norm=0.0, center=None):
        self.tensors = [np.asarray(t, dtype=complex) for t in tensors]
        self.log_norm = float(log_norm)
        self.center = center
        self.discarded_total = 0.0
        for k in range(len(self.tensors) - 1):
            if self.tensors[k].shape[2] != self.tensors[k + 1].shape[0]:
                raise ValueError(f"bond mismatch between sites {k} and {k+1}")
        if self.tensors[0].shape[0] != 1 or self.tensors[-1].shape[2] != 1:
            raise ValueError("outer bonds must have dimension 1")

    @property
    def n_sites(self):
        return len(self.tensors)

    def bond_dims(self):
        return [t.shape[2] for t in self.tensors[:-1]]

    def max_bond(self):
        dims = self.bond_dims()
        return max(dims) if dims else 1

    def copy(self):
        tt = TensorTrain([t.copy() for t in self.tensors], self.log_norm, self.center)
        tt.discarded_total = self.discarded_total
        return tt

    def norm(self):
        if self.center is not None:
            return float(np.linalg.norm(self.tensors[self.center]))
        v = np.ones((1, 1), dtype=complex)
        for t in self.tensors:
            v = np.einsum("ab,apr,bps->rs", v, np.conj(t), t, optimize=True)
        return math.sqrt(max(float(np.real(v[0, 0])), 0.0))

    def normalize(self):
        """Fold the state norm into the log-norm accumulator."""
        if self.center is None:
            self.canonicalize(0)
        nrm = float(np.linalg.norm(self.tensors[self.center]))
        if nrm == 0.0:
            raise ValueError("cannot normalize an annihilated train")
        self.tensors[self.center] = self.tensors[self.center] / nrm
        self.log_norm += math.log(nrm)
        return self

    def canonicalize(self, center=0):
        """QR sweeps putting the orthogonality center at `center`."""
        n = self.n_sites
        for k in range(center):
            self._push_right(k)
        for k in range(n - 1, center, -1):
            self._push_left(k)
        self.center = center
        return self

    def move_center(self, target):
        if self.center is None:
            return self.canonicalize(target)
        while self.center < target:
            self._push_right(self.center)
            self.center += 1
        while self.center > target:
            self._push_left(self.center)
            self.center -= 1
        return self

    def _push_right(self, k):
        t = self.tensors[k]
        l, p, r = t.shape
        q, rr = np.linalg.qr(t.reshape(l * p, r))
        self.tensors[k] = q.reshape(l, p, q.shape[1])
        self.tensors[k + 1] = np.einsum("ab,bpr->apr", rr, self.tensors[k + 1])

    def _push_left(self, k):
        t = self.tensors[k]
        l, p, r = t.shape
        q, rr = np.linalg.qr(t.reshape(l, p * r).T.conj())
        self.tensors[k] = q.T.conj().reshape(q.shape[1], p, r)
        self.tensors[k - 1] = np.einsum("apb,bc->apc", self.tensors[k - 1], rr.T.conj())

    def to_dense(self, include_log_norm=False):
        """Flat amplitude vector, site 0 most significant. Small trains only."""
        if self.n_sites > 24:
            raise ValueError("train too large for dense conversion")
        v = np.ones((1,), dtype=complex)
        for t in self.tensors:
            v = np.tensordot(v.reshape(-1, t.shape[0]), t, axes=(1, 0)).reshape(-1)
        if include_log_norm:
            v = v * math.exp(self.log_norm)
        return v

    def dense_normalized(self):
        v = self.to_dense()
        return v / np.linalg.norm(v)


def product_tt(vectors):
    """Bond-dimension-1 train from local 2-vectors; norm = product of local norms."""
    if not len(vectors):
        raise ValueError("need at least one site")
    tensors = [np.asarray(v, dtype=complex).reshape(1, 2, 1) for v in vectors]
    return TensorTrain(tensors, center=None)


class OperatorTrain:
    """Per-site (left, phys_out, phys_in, right) tensors."""

    def __init__(self, tensors):
        self.tensors = [np.asarray(t, dtype=complex) for t in tensors]
        for k in range(len(self.tensors) - 1):
            if self.tensors[k].shape[3] != self.tensors[k + 1].shape[0]:
                raise ValueError(f"operator bond mismatch at {k}")

    @property
    def n_sites(self):
        return len(self.tensors)


def identity_ot(n):
    eye = np.eye(2, dtype=complex).reshape(1, 2, 2, 1)
    return OperatorTrain([eye.copy() for _ in range(n)])


def _truncation_split(svals, policy):
    """Number of kept values and the normalized discarded weight."""
    total = float(np.sum(svals ** 2))
    if total == 0.0:
        return 1, 0.0, False
    keep = np.nonzero(svals > NOISE_FLOOR * svals[0])[0]
    k = int(keep[-1]) + 1 if len(keep) else 1
    if policy.epsilon > 0:
        tail = np.cumsum((svals[::-1] ** 2))[::-1] / total  # tail[i] = discarded if keep i..
        while k > 1 and tail[k - 1] <= policy.epsilon:
            k -= 1
    breached = False
    if policy.chi_max is not None and k > policy.chi_max:
        k = policy.chi_max
        breached = True
    discarded = float(np.sum(svals[k:] ** 2) / total)
    return k, discarded, breached


def compress(tt, policy):
    """One left QR sweep plus one right-to-left truncating SVD sweep.

    Returns (discarded_weight, max_bond, cap_breached) for the sweep and
    leaves the center at site 0.
    """
    n = tt.n_sites
    for k in range(n - 1):
        tt._push_right(k)
    tt.center = n - 1
    discarded = 0.0
    breached = False
    for k in range(n - 1, 0, -1):
        t = tt.tensors[k]
        l, p, r = t.shape
        u, s, vh = np.linalg.svd(t.reshape(l, p * r), full_matrices=False)
        kk, disc, br = _truncation_split(s, policy)
        discarded += disc
        breached = breached or br
        u, s, vh = u[:, :kk], s[:kk], vh[:kk, :]
        tt.tensors[k] = vh.reshape(kk, p, r)
        carry = u * s
        tt.tensors[k - 1] = np.einsum("apb,bc->apc", tt.tensors[k - 1], carry)
    tt.center = 0
    tt.discarded_total += discarded
    return discarded, tt.max_bond(), breached


def apply_ot(tt, ot, policy=None):
    """Apply an operator train and recompress; returns (train, diagnostics)."""
    policy = policy or CompressionPolicy()
    if ot.n_sites != tt.n_sites:
        raise ValueError("length mismatch")
    tensors = []
    for A, O in zip(tt.tensors, ot.tensors):
        # (a,po,pi,b) x (l,pi,r) -> (a l, po, b r)
        t = np.einsum("apqb,lqr->alpbr", O, A, optimize=True)
        al = t.shape[0] * t.shape[1]
        br = t.shape[3] * t.shape[4]
        tensors.append(t.reshape(al, 2, br))
    out = TensorTrain(tensors, log_norm=tt.log_norm)
    out.discarded_total = tt.discarded_total
    disc, max_bond, breached = compress(out, policy)
    delta = 0.0
    if policy.renormalize:
        before = out.log_norm
        out.normalize()
        delta = out.log_norm - before
    return out, StepDiagnostics(max_bond=max_bond, discarded=disc,
                                log_norm_delta=delta, cap_breached=breached)


def apply_gate1(tt, site, mat):
    """Single-site gate, in place.

    A non-unitary factor away from the center invalidates canonical
    structure, so the center is dropped unless the gate lands on it; the
    next truncating operation re-canonicalizes.
    """
    tt.tensors[site] = np.einsum("pq,lqr->lpr", np.asarray(mat, dtype=complex), tt.tensors[site])
    if tt.center != site:
        tt.center = None
    return tt


def apply_gate2(tt, site, mat, policy=None):
    """Two-site gate on (site, site+1) with a truncating split, in place.

    `mat` is 4x4 ordered |p_site p_site+1>. Leaves the center at site+1.
    Returns the discarded weight of the split.
    """
    policy = policy or CompressionPolicy()
    tt.move_center(site)
    a, b = tt.tensors[site], tt.tensors[site + 1]
    l, _, m = a.shape
    _, _, r = b.shape
    theta = np.einsum("lpm,mqr->lpqr", a, b).reshape(l, 4, r)
    g = np.asarray(mat, dtype=complex).reshape(2, 2, 2, 2)  # (p', q', p, q)
    theta = np.einsum("pqst,lstr->lpqr", g.reshape(2, 2, 2, 2), theta.reshape(l, 2, 2, r), optimize=True)
    u, s, vh = np.linalg.svd(theta.reshape(l * 2, 2 * r), full_matrices=False)
    k, disc, _ = _truncation_split(s, policy)
    u, s, vh = u[:, :k], s[:k], vh[:k, :]
    tt.tensors[site] = u.reshape(l, 2, k)
    tt.tensors[site + 1] = (s[:, None] * vh).reshape(k, 2, r)
    tt.center = site + 1
    tt.discarded_total += disc
    return disc


def bond_spectrum(tt, cut):
    """Singular values across the bond between sites cut-1 and cut."""
    if not (1 <= cut <= tt.n_sites - 1):
        raise ValueError(f"cut {cut} out of range")
    tt.move_center(cut - 1)
    t = tt.tensors[cut - 1]
    l, p, r = t.shape
    s = np.linalg.svd(t.reshape(l * p, r), compute_uv=False)
    nrm = np.linalg.norm(s)
    if nrm == 0.0:
        raise ValueError("annihilated train has no spectrum")
    return s / nrm


def prefix_renyi2(tt, cut):
    """-ln sum lambda^4 across the prefix cut."""
    lam = bond_spectrum(tt, cut)
    return -math.log(max(float(np.sum(lam ** 4)), 1e-300))


def segment_renyi2(tt, start, stop):
    """-ln tr rho_A^2 for the contiguous interval [start, stop).

    Explicit two-layer network contraction of rho_A^2 with identity
    environments (center moved inside the interval); cost polynomial in the
    bond dimension.
    """
    if not (0 <= start < stop <= tt.n_sites):
        raise ValueError("empty or out-of-range interval")
    if start == 0 and stop == tt.n_sites:
        return 0.0
    if start == 0:
        return prefix_renyi2(tt, stop)
    if stop == tt.n_sites:
        return prefix_renyi2(tt, start)
    work = tt.copy()
    work.move_center(start)
    work.tensors[start] = work.tensors[start] / np.linalg.norm(work.tensors[start])
    chi_l = work.tensors[start].shape[0]
    # rails: (ket1, bra1, ket2, bra2); left env pairs (1,2) and (3,4)
    env = np.einsum("ab,cd->abcd", np.eye(chi_l), np.eye(chi_l)).astype(complex)
    for k in range(start, stop):
        t = work.tensors[k]
        tc = np.conj(t)
        env = np.einsum("abcd,apw->bcdpw", env, t, optimize=True)
        env = np.einsum("bcdpw,bqx->cdpwqx", env, tc, optimize=True)
        env = np.einsum("cdpwqx,cqy->dpwxy", env, t, optimize=True)
        env = np.einsum("dpwxy,dpz->wxyz", env, tc, optimize=True)
    val = float(np.real(np.einsum("aabb->", env)))
    return -math.log(max(val, 1e-300))


def tt_overlap(tt, bra_vectors):
    """<prod bra|train>, conjugating the given local kets; includes log-norm."""
    if len(bra_vectors) != tt.n_sites:
        raise ValueError("length mismatch")
    v = np.ones((1,), dtype=complex)
    for t, b in zip(tt.tensors, bra_vectors):
        b = np.conj(np.asarray(b, dtype=complex))
        v = np.einsum("l,lpr,p->r", v, t, b, optimize=True)
    return complex(v[0]) * math.exp(tt.log_norm)


def tt_dot(a, b):
    """<a|b> for two trains of equal length, including both log-norms."""
    if a.n_sites != b.n_sites:
        raise ValueError("length mismatch")
    v = np.ones((1, 1), dtype=complex)
    for ta, tb in zip(a.tensors, b.tensors):
        v = np.einsum("ab,apr,bps->rs", v, np.conj(ta), tb, optimize=True)
    return complex(v[0, 0]) * math.exp(a.log_norm + b.log_norm)


def fidelity(a, b):
    """|<a|b>|^2 between normalized versions of two trains."""
    va = tt_dot(a, a).real
    vb = tt_dot(b, b).real
    ab = tt_dot(a, b)
    return float(abs(ab) ** 2 / (va * vb))

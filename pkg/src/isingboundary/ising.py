"""Complex-parameter Ising models from measured resource states.

Couplings are never stored as (possibly infinite) K or h values: every term
keeps the factor base V, contributing (1, V) on spin product +1/-1, with the
tagged infinity stored as the exact pair (0, 1). Spin-carrying sites get one
field term each, coupling sites one pair/plaquette term over their
spin-carrying neighbours (Hadamard-transformed base). Proportionality
constants are dropped throughout; cross checks use ratios.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import lattice as lat
from .measure import Weight, local_state

BRUTE_FORCE_CAP = 26
_BLOCK_BITS = 18

FIELD = "field"
PAIR = "pair"
PLAQUETTE = "plaquette"
_SPIN_COUNTS = {FIELD: (1,), PAIR: (2,), PLAQUETTE: (2, 3, 4)}


@dataclass(frozen=True)
class IsingTerm:
    kind: str
    spins: tuple
    V: Weight
    scale: complex = 1.0 + 0j  # amplitude factored out when normalizing to (1, V)

    def __post_init__(self):
        if self.kind not in _SPIN_COUNTS:
            raise ValueError(f"unknown term kind {self.kind!r}")
        if len(self.spins) not in _SPIN_COUNTS[self.kind]:
            raise ValueError(f"{self.kind} term with {len(self.spins)} spins")


@dataclass
class IsingModel:
    n_spins: int
    terms: list
    spin_sites: list = None     # SiteId per spin slot (None for bare fixtures)
    conjugated: bool = True
    provenance: dict = field(default_factory=dict)


def term_factors(t):
    """(f_plus, f_minus): contribution for spin product +1 / -1."""
    if t.V.is_inf:
        return (0j, 1 + 0j)
    return (1 + 0j, t.V.value)


def amplitude_pair(W, sub, conjugated=True):
    """Exact local amplitude pair (a_plus, a_minus) for one measured site.

    Spin-carrying sites contribute their collapse-vector components in the
    Z basis, coupling sites in the X basis. The stored factor pair (1, V)
    (or (0, 1) at the tagged infinity) is this pair divided by its leading
    nonzero entry; that leading entry is the term's `scale`.
    """
    c = np.conj(local_state(Weight.of(W))) if conjugated else local_state(Weight.of(W))
    if sub == lat.CIRC:
        return complex(c[0]), complex(c[1])
    return complex(c[0] + c[1]) / math.sqrt(2), complex(c[0] - c[1]) / math.sqrt(2)


def _normalized_term(kind, spins, pair):
    a_plus, a_minus = pair
    if abs(a_plus) > 1e-14 * max(abs(a_minus), 1.0):
        return IsingTerm(kind, spins, Weight.of(a_minus / a_plus), scale=a_plus)
    return IsingTerm(kind, spins, Weight.infinity(), scale=a_minus)


def cluster_to_ising(spec, weights, conjugate=True):
    """Map a lattice plus per-site measured weights to an IsingModel.

    `weights` maps measured site index -> Weight. Spin slots are assigned to
    every spin-carrying site (measured or not) so partition sums can freeze
    unmeasured boundary spins. Raises KeyError when a weight is missing for
    any measured site of the lattice.
    """
    sites = lat.enumerate_sites(spec)
    lk = {(s.x, s.y, s.role): s for s in sites}
    for s in lat.bulk_sites(spec):
        if s.index not in weights:
            raise KeyError(f"missing weight for measured site {s}")

    circ = [s for s in sites if lat.sublattice(spec, s) == lat.CIRC]
    spin_of = {s.index: k for k, s in enumerate(circ)}
    terms = []
    for s in sites:
        if s.index not in weights:
            continue
        W = Weight.of(weights[s.index])
        sub = lat.sublattice(spec, s)
        pair = amplitude_pair(W, sub, conjugated=conjugate)
        if sub == lat.CIRC:
            terms.append(_normalized_term(FIELD, (spin_of[s.index],), pair))
        else:
            nbr = [n for n in lat.neighbors(spec, s, _lookup=lk) if n.index in spin_of]
            spins = tuple(sorted(spin_of[n.index] for n in nbr))
            kind = PAIR if spec.kind == lat.LIEB else PLAQUETTE
            if len(spins) == 1:
                kind = FIELD  # dangling coupling site acts as an external field
            terms.append(_normalized_term(kind, spins, pair))
    return IsingModel(
        n_spins=len(circ),
        terms=terms,
        spin_sites=circ,
        conjugated=conjugate,
        provenance={"kind": spec.kind, "Lx": spec.Lx, "Ly": spec.Ly},
    )


def toric_edge_model(Lx, Ly, edge_weights, x_periodic=False, conjugate=True):
    """Plain square grid of spins with one pair term per edge, base V = W.

    `edge_weights` maps ((x1,y1),(x2,y2)) vertex pairs to weights; vertices
    use x in 0..Lx-1, y in 0..Ly-1.
    """
    def vid(x, y):
        return y * Lx + x

    terms = []
    for (a, b), W in sorted(edge_weights.items()):
        (x1, y1), (x2, y2) = a, b
        for (x, y) in (a, b):
            if not (0 <= x < Lx and 0 <= y < Ly):
                raise ValueError(f"vertex {(x, y)} outside {Lx}x{Ly} grid")
        pair = amplitude_pair(W, lat.CIRC, conjugated=conjugate)
        terms.append(_normalized_term(PAIR, tuple(sorted((vid(x1, y1), vid(x2, y2)))), pair))
    return IsingModel(n_spins=Lx * Ly, terms=terms, conjugated=conjugate,
                      provenance={"kind": "toric_edges", "Lx": Lx, "Ly": Ly, "x_periodic": x_periodic})


def grid_edges(Lx, Ly, x_periodic=False):
    """Nearest-neighbour vertex pairs of an Lx x Ly grid (helper for fixtures)."""
    edges = []
    for y in range(Ly):
        for x in range(Lx):
            if x + 1 < Lx:
                edges.append(((x, y), (x + 1, y)))
            elif x_periodic and Lx > 2:
                edges.append(((x, y), (0, y)))
            if y + 1 < Ly:
                edges.append(((x, y), (x, y + 1)))
    return edges


def brute_force_Z(model, frozen=None):
    """Exhaustive partition sum; spin 0 is the most significant enumeration bit.

    `frozen` maps spin slots to +/-1; frozen spins drop out of the sum.
    Blocked vectorized evaluation with a fixed block order so results are
    reproducible bit-for-bit run to run.
    """
    frozen = dict(frozen or {})
    free = [k for k in range(model.n_spins) if k not in frozen]
    n = len(free)
    if n > BRUTE_FORCE_CAP:
        raise ValueError(f"{n} free spins exceeds brute-force cap {BRUTE_FORCE_CAP}")
    pos = {k: j for j, k in enumerate(free)}

    block = min(n, _BLOCK_BITS)
    n_hi = n - block
    total = 0j
    fplus = np.array([term_factors(t)[0] for t in model.terms])
    fminus = np.array([term_factors(t)[1] for t in model.terms])
    lo = np.arange(1 << block, dtype=np.int64)
    for hi in range(1 << n_hi):
        codes = (hi << block) | lo
        acc = np.ones(codes.shape, dtype=complex)
        for ti, t in enumerate(model.terms):
            parity = np.zeros(codes.shape, dtype=np.int64)
            sign = 1
            for s in t.spins:
                if s in frozen:
                    sign *= frozen[s]
                else:
                    parity ^= (codes >> (n - 1 - pos[s])) & 1
            if sign == -1:
                parity ^= 1
            acc *= np.where(parity == 0, fplus[ti], fminus[ti])
        total += acc.sum()
    return complex(total)


def scale_product(model):
    """(log magnitude, unit phase) of the product of per-term scales.

    Restores the local amplitude normalizations dropped by the (1, V)
    convention; a full-projection overlap equals scale * Z up to one
    outcome-independent constant per lattice.
    """
    log_mag = 0.0
    phase = 1.0 + 0j
    for t in model.terms:
        a = abs(t.scale)
        if a == 0.0:
            raise ValueError("term with zero scale")
        log_mag += math.log(a)
        phase *= t.scale / a
    return log_mag, phase


def equivalent_factor_pair(W, sub, conjugated=True):
    """Statistical-weight pair read off the parametrized site wavefunction.

    The alternative route: expand sum_s exp(h s)|s> (spin-carrying sites,
    Z basis) or sum_Q exp(K Q)|Q> (coupling sites, X basis) in the collapse
    vector and read the two components. Must agree with the stored (1, V)
    factor pairs up to one common scale.
    """
    return amplitude_pair(W, sub, conjugated=conjugated)


def dump_terms(model):
    """One JSON record per term: {kind, spins, V_re, V_im, V_inf}."""
    recs = []
    for t in model.terms:
        recs.append({
            "kind": t.kind,
            "spins": list(t.spins),
            "V_re": 0.0 if t.V.is_inf else t.V.re,
            "V_im": 0.0 if t.V.is_inf else t.V.im,
            "V_inf": bool(t.V.is_inf),
        })
    return recs


def load_terms(records, n_spins):
    terms = []
    for r in records:
        V = Weight.infinity() if r["V_inf"] else Weight(r["V_re"], r["V_im"])
        terms.append(IsingTerm(r["kind"], tuple(r["spins"]), V))
    return IsingModel(n_spins=n_spins, terms=terms)


def model_to_json(model):
    return json.dumps({"n_spins": model.n_spins, "terms": dump_terms(model)}, indent=1)


def model_from_json(text):
    d = json.loads(text)
    return load_terms(d["terms"], d["n_spins"])

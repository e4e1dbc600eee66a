"""Measurement directions, outcomes and the extended-complex weight algebra.

A measurement along (theta, phi) with outcome mu collapses a qubit onto
N * (|0> + W |1>) where W = tan(theta/2) e^{i phi} for mu = +1 and
W = -1/conj(w) for mu = -1. W lives on the Riemann sphere; the point at
infinity is a tagged value, never a large float, so projector limits stay
exact. The theta -> 0+ limit fixes (mu=+1 -> 0, mu=-1 -> +infinity).
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import lattice as lat


@dataclass(frozen=True)
class Direction:
    theta: float
    phi: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi):
            raise ValueError(f"theta out of range: {self.theta}")
        if not (0.0 <= self.phi < 2 * math.pi):
            raise ValueError(f"phi out of range: {self.phi}")


@dataclass(frozen=True)
class Weight:
    """Finite complex value or the tagged point at infinity."""

    re: float = 0.0
    im: float = 0.0
    is_inf: bool = False

    @classmethod
    def of(cls, value):
        if isinstance(value, Weight):
            return value
        z = complex(value)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            return cls(is_inf=True)
        return cls(z.real, z.imag)

    @classmethod
    def infinity(cls):
        return cls(is_inf=True)

    @property
    def value(self):
        if self.is_inf:
            raise ValueError("point at infinity has no complex value")
        return complex(self.re, self.im)

    def conj(self):
        return Weight(self.re, -self.im, self.is_inf)

    def abs2(self):
        if self.is_inf:
            return math.inf
        return self.re * self.re + self.im * self.im

    def __repr__(self):
        return "Weight(inf)" if self.is_inf else f"Weight({complex(self.re, self.im)})"


W_INF = Weight.infinity()


_SNAP = 1e-12


def _snap(v):
    # Pauli measurement points are exact lattice points of the weight algebra
    # (the factor-pair representation relies on exact 0, +-1, +-i, infinity),
    # so components within 1e-12 of a cardinal value are snapped.
    for target in (0.0, 1.0, -1.0):
        if abs(v - target) < _SNAP:
            return target
    return v


def direction_weight(d):
    """w = tan(theta/2) e^{i phi}; theta = pi maps to infinity."""
    if d.theta >= math.pi:
        return W_INF
    t = math.tan(d.theta / 2.0)
    if t > 1e12:
        return W_INF
    z = t * cmath.exp(1j * d.phi)
    return Weight.of(complex(_snap(z.real), _snap(z.imag)))


def outcome_weight(w, mu):
    """W = w for mu=+1, -1/conj(w) for mu=-1 (0 -> +infinity, infinity -> 0)."""
    w = Weight.of(w)
    if mu == 1:
        return w
    if mu != -1:
        raise ValueError(f"outcome must be +1 or -1, got {mu}")
    if w.is_inf:
        return Weight(0.0, 0.0)
    if w.re == 0.0 and w.im == 0.0:
        return W_INF
    return Weight.of(-1.0 / w.conj().value)


def hadamard_weight(W):
    """(1 - W)/(1 + W); involution on the extended complex plane."""
    W = Weight.of(W)
    if W.is_inf:
        return Weight(-1.0, 0.0)
    z = W.value
    if z == -1:
        return W_INF
    return Weight.of((1 - z) / (1 + z))


def local_state(W, conjugate=False):
    """Normalized 2-vector N*(1, W); W = infinity gives (0, 1)."""
    W = Weight.of(W)
    if W.is_inf:
        return np.array([0.0, 1.0], dtype=complex)
    z = W.conj().value if conjugate else W.value
    N = 1.0 / math.sqrt(1.0 + W.abs2())
    return np.array([N, N * z], dtype=complex)


def log_local_norm(W):
    """ln N for the local collapse vector (0 for the tagged infinity)."""
    W = Weight.of(W)
    if W.is_inf:
        return 0.0
    return -0.5 * math.log1p(W.abs2())


FORCED_PLUS = "forced+"
FORCED_MINUS = "forced-"
RANDOM = "random"
BORN = "born"
_POLICIES = (FORCED_PLUS, FORCED_MINUS, RANDOM, BORN)


@dataclass(frozen=True)
class MeasurementLayout:
    """Per-sublattice directions, outcome policy and the seed they hash from.

    theta_o/phi_o apply to spin-carrying (CIRC) sites, theta_b/phi_b to
    coupling (BULLET) sites. sign_randomize_b draws the BULLET polar angle
    from {theta_b, -theta_b} per site (the random-sign coupling layout, with
    -theta realized as (theta, phi + pi)). per_site overrides map a site
    index to a (theta, phi) pair.
    """

    theta_o: float
    phi_o: float = 0.0
    theta_b: float = None
    phi_b: float = None
    policy: str = RANDOM
    seed: int = 0
    sign_randomize_b: bool = False
    per_site: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.policy not in _POLICIES:
            raise ValueError(f"unknown outcome policy {self.policy!r}")
        if self.theta_b is None:
            object.__setattr__(self, "theta_b", self.theta_o)
        if self.phi_b is None:
            object.__setattr__(self, "phi_b", self.phi_o)


class ConcreteLayout:
    """Per-site (theta, phi, mu) for the measured bulk of one trajectory."""

    def __init__(self, spec, theta, phi, mu, measured):
        self.spec = spec
        self.theta = theta
        self.phi = phi
        self.mu = mu
        self.measured = measured  # boolean per site index

    def weight(self, idx):
        if not self.measured[idx]:
            raise KeyError(f"site {idx} is not measured")
        w = direction_weight(Direction(self.theta[idx], self.phi[idx]))
        return outcome_weight(w, int(self.mu[idx]))

    def weights(self):
        return {i: self.weight(i) for i in range(len(self.measured)) if self.measured[i]}


def layout_rng(seed, traj=0):
    """Counter-based stream: Philox keyed by seed, jumped per trajectory."""
    return np.random.Generator(np.random.Philox(key=seed).jumped(traj))


def sample_layout(layout, spec, traj=0):
    """Resolve a layout into concrete per-site directions and outcomes.

    Deterministic in (seed, traj); forced policies ignore the rng draws but
    consume the same stream so per-site alignment is stable across policies.
    """
    if layout.policy == BORN:
        raise ValueError("born outcomes exist only inside the stabilizer engine")
    sites = lat.enumerate_sites(spec)
    n = len(sites)
    measured = np.zeros(n, dtype=bool)
    for s in lat.bulk_sites(spec):
        measured[s.index] = True
    rng = layout_rng(layout.seed, traj)
    u = rng.random((n, 2))  # column 0: sign draw, column 1: outcome draw
    theta = np.zeros(n)
    phi = np.zeros(n)
    mu = np.ones(n, dtype=np.int8)
    for s in sites:
        i = s.index
        if not measured[i]:
            continue
        if i in layout.per_site:
            th, ph = layout.per_site[i]
        elif lat.sublattice(spec, s) == lat.CIRC:
            th, ph = layout.theta_o, layout.phi_o
        else:
            th, ph = layout.theta_b, layout.phi_b
            if layout.sign_randomize_b and u[i, 0] < 0.5:
                th, ph = th, (ph + math.pi) % (2 * math.pi)
        theta[i], phi[i] = th, ph
        if layout.policy == FORCED_PLUS:
            mu[i] = 1
        elif layout.policy == FORCED_MINUS:
            mu[i] = -1
        else:
            mu[i] = 1 if u[i, 1] < 0.5 else -1
    return ConcreteLayout(spec, theta, phi, mu, measured)

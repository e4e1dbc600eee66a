"""Trajectory-level runners shared by the CLI, scripts and acceptance suite.

Module-level functions so process pools can pickle them; results are merged
in trajectory order by the callers, keeping every aggregate deterministic.
Workers run in a single lazily-created spawn-context pool: forking a process
that has already spun up BLAS/JIT threads deadlocks sporadically, and fresh
interpreters reuse the on-disk JIT cache anyway.
"""

import atexit
import multiprocessing as mp
from dataclasses import dataclass

from . import boundary as bnd
from . import lattice as lat
from .measure import MeasurementLayout, sample_layout
from .mps import CompressionPolicy, prefix_renyi2

_POOLS = {}


def get_pool(workers):
    """Shared forkserver-context pool, one per worker count, closed at exit.

    forkserver children descend from a clean early process (no inherited
    BLAS/JIT threads, unlike fork) and do not re-execute __main__ (unlike
    spawn), so script-style callers work too.
    """
    if workers not in _POOLS:
        ctx = mp.get_context("forkserver")
        _POOLS[workers] = ctx.Pool(workers)
    return _POOLS[workers]


def _shutdown():
    for pool in _POOLS.values():
        pool.terminate()
        pool.join()
    _POOLS.clear()


atexit.register(_shutdown)


@dataclass(frozen=True)
class AngleJob:
    kind: str
    Lx: int
    Ly: int
    theta: float
    phi: float = 0.0
    theta_b: float = None
    phi_b: float = None
    policy: str = "random"
    sign_randomize: bool = False
    bottom: str = "smooth"
    seed: int = 0
    traj: int = 0
    epsilon: float = 1e-9
    engine: str = "mps"
    want_depth: bool = False


def run_angle_trajectory(job):
    """One chain-evolution trajectory; returns (S_half, max_bond, depth curve)."""
    spec = lat.LatticeSpec(job.kind, job.Lx, job.Ly, bottom=job.bottom)
    layout = MeasurementLayout(theta_o=job.theta, phi_o=job.phi,
                               theta_b=job.theta_b, phi_b=job.phi_b,
                               policy=job.policy, seed=job.seed,
                               sign_randomize_b=job.sign_randomize)
    cl = sample_layout(layout, spec, traj=job.traj)
    runner = bnd.evolve if job.engine == "mps" else bnd.run_circuit
    cut = job.Lx // 2
    tt, diags = runner(spec, cl, CompressionPolicy(epsilon=job.epsilon), cuts=[cut])
    s_half = prefix_renyi2(tt, max(1, tt.n_sites // 2))
    depth = [d.entropies.get(cut, 0.0) for d in diags[:-1]] if job.want_depth else []
    max_bond = max(d.max_bond for d in diags)
    return s_half, max_bond, depth


def pool_map(fn, jobs, workers=1):
    """Deterministic map: results come back in job order regardless of workers."""
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    pool = get_pool(workers)
    return pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers)))

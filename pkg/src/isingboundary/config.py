"""Flat key/value run configuration.

One human-editable file per run: `key = value` lines, `#` comments, plus
repeatable `site = x,y,role,theta,phi` lines overriding the direction of
single sites. Validation failures raise ConfigError (CLI exit code 2).
"""

import hashlib
import math
from dataclasses import dataclass, field

from . import lattice as lat
from .measure import BORN, FORCED_MINUS, FORCED_PLUS, RANDOM, MeasurementLayout
from .mps import CompressionPolicy

ENGINES = ("mps", "circuit", "stabilizer", "oracle", "ising")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    engine: str = "mps"
    lattice: str = lat.SQUARE
    Lx: int = 6
    Ly: int = 6
    x_periodic: bool = False
    bottom: str = "smooth"
    theta_o: float = 0.5 * math.pi / 2
    phi_o: float = 0.0
    theta_b: float = None
    phi_b: float = None
    outcomes: str = RANDOM
    sign_randomize: bool = False
    p_x: float = 0.0
    p_y: float = 0.0
    p_z: float = 1.0
    x_vertices: bool = False
    model: str = "bulk"
    epsilon: float = 1e-9
    chi_max: int = 0
    renormalize: bool = True
    n_traj: int = 20
    seed: int = 0
    L_list: tuple = ()
    grid: tuple = ()
    sweep_param: str = "p_y"
    region_frac: float = None
    ly_factor: int = 2
    cuts: str = "half"
    per_site: dict = field(default_factory=dict)
    raw_text: str = ""

    def validate(self):
        if self.engine not in ENGINES:
            raise ConfigError(f"unknown engine {self.engine!r}")
        try:
            spec = self.lattice_spec()
        except ValueError as e:
            raise ConfigError(str(e)) from e
        if self.outcomes == BORN and self.engine != "stabilizer":
            raise ConfigError("born outcomes require the stabilizer engine")
        if self.x_periodic and self.engine in ("mps", "circuit"):
            raise ConfigError("chain evolution engines need an open spatial boundary")
        if self.engine == "stabilizer":
            if abs(self.p_x + self.p_y + self.p_z - 1.0) > 1e-9:
                raise ConfigError("p_x + p_y + p_z must be 1")
            if min(self.p_x, self.p_y, self.p_z) < 0:
                raise ConfigError("probabilities must be nonnegative")
        if self.model not in ("bulk", "xvertex"):
            raise ConfigError(f"unknown model {self.model!r}")
        if self.epsilon < 0:
            raise ConfigError("epsilon must be >= 0")
        if self.n_traj < 1:
            raise ConfigError("n_traj must be >= 1")
        if self.grid and len(self.grid) == 0:
            raise ConfigError("grid must be nonempty")
        return spec

    def lattice_spec(self):
        return lat.LatticeSpec(self.lattice, self.Lx, self.Ly,
                               x_periodic=self.x_periodic, bottom=self.bottom)

    def layout(self):
        return MeasurementLayout(theta_o=self.theta_o, phi_o=self.phi_o,
                                 theta_b=self.theta_b, phi_b=self.phi_b,
                                 policy=self.outcomes, seed=self.seed,
                                 sign_randomize_b=self.sign_randomize,
                                 per_site=dict(self.per_site))

    def policy(self):
        return CompressionPolicy(epsilon=self.epsilon,
                                 chi_max=self.chi_max or None,
                                 renormalize=self.renormalize)

    def digest(self):
        return hashlib.sha256(self.raw_text.encode()).hexdigest()[:8]


_BOOLS = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}

_FIELD_TYPES = {
    "engine": str, "lattice": str, "Lx": int, "Ly": int, "x_periodic": bool,
    "bottom": str, "theta_o": float, "phi_o": float, "theta_b": float,
    "phi_b": float, "outcomes": str, "sign_randomize": bool, "p_x": float,
    "p_y": float, "p_z": float, "x_vertices": bool, "model": str,
    "epsilon": float, "chi_max": int, "renormalize": bool, "n_traj": int,
    "seed": int, "sweep_param": str, "region_frac": float, "ly_factor": int,
    "cuts": str,
}


def parse_config(text):
    cfg = RunConfig(raw_text=text)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key == "site":
            parts = [p.strip() for p in val.split(",")]
            if len(parts) != 5:
                raise ConfigError(f"line {lineno}: site = x,y,role,theta,phi")
            x, y, role, th, ph = int(parts[0]), int(parts[1]), parts[2], float(parts[3]), float(parts[4])
            cfg.per_site[(x, y, role)] = (th, ph)
        elif key == "L_list":
            cfg.L_list = tuple(int(v) for v in val.split(",") if v.strip())
        elif key == "grid":
            lo, hi, n = val.split(":")
            n = int(n)
            lo, hi = float(lo), float(hi)
            cfg.grid = tuple(lo + (hi - lo) * k / (n - 1) for k in range(n)) if n > 1 else (lo,)
        elif key in _FIELD_TYPES:
            typ = _FIELD_TYPES[key]
            if typ is bool:
                if val.lower() not in _BOOLS:
                    raise ConfigError(f"line {lineno}: bad boolean {val!r}")
                setattr(cfg, key, _BOOLS[val.lower()])
            else:
                try:
                    setattr(cfg, key, typ(val))
                except ValueError as e:
                    raise ConfigError(f"line {lineno}: {e}") from e
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    # resolve per-site overrides to site indices once the lattice is known
    if cfg.per_site:
        lk = lat.site_lookup(cfg.lattice_spec())
        resolved = {}
        for (x, y, role), angles in cfg.per_site.items():
            if (x, y, role) not in lk:
                raise ConfigError(f"site override ({x},{y},{role}) not on the lattice")
            resolved[lk[(x, y, role)].index] = angles
        cfg.per_site = resolved
    return cfg


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())

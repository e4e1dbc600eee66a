"""Square and Lieb lattice geometries with sublattice bookkeeping.

Conventions (fixed so that every CSV / seed stream is reproducible):
  * vertices sit at integer (x, y), x in 0..Lx-1, y in 1..Ly;
  * Lieb horizontal edges connect (x,y)-(x+1,y), vertical edges (x,y)-(x,y+1);
  * a "rough" Lieb bottom adds dangling vertical edges below row 1 (y = 0);
  * sites are enumerated row-major, bottom first; inside a Lieb row vertices
    and horizontal edges interleave by x; vertical edges form their own band
    between rows. The top row (y = Ly) is the unmeasured boundary.
"""

from dataclasses import dataclass

SQUARE = "square"
LIEB = "lieb"

# site roles
PLAIN = "plain"
VERTEX = "vertex"
HEDGE = "hedge"
VEDGE = "vedge"

# sublattice labels: CIRC carries the classical spins, BULLET the couplings
CIRC = "o"
BULLET = "b"


@dataclass(frozen=True)
class SiteId:
    index: int
    x: int
    y: int
    role: str


@dataclass(frozen=True)
class LatticeSpec:
    kind: str
    Lx: int
    Ly: int
    x_periodic: bool = False
    bottom: str = "smooth"

    def __post_init__(self):
        if self.kind not in (SQUARE, LIEB):
            raise ValueError(f"unknown lattice kind {self.kind!r}")
        if self.Lx < 2 or self.Ly < 2:
            raise ValueError(f"lattice must be at least 2x2, got {self.Lx}x{self.Ly}")
        if self.bottom not in ("smooth", "rough"):
            raise ValueError(f"unknown bottom boundary {self.bottom!r}")
        if self.kind == SQUARE and self.bottom != "smooth":
            raise ValueError("square lattice uses the fixed bottom convention; bottom must be 'smooth'")
        if self.x_periodic and self.Lx < 3:
            raise ValueError("x_periodic needs Lx >= 3 to avoid duplicate bonds")
        if self.x_periodic and self.kind == SQUARE and self.Lx % 2:
            raise ValueError("periodic square rings must have even Lx to stay bipartite")


def _band(site_kind_y, is_vedge):
    # ordering key: in-row sites at band 2y, vertical edges above row y at 2y+1
    return 2 * site_kind_y + (1 if is_vedge else 0)


def enumerate_sites(spec):
    """All sites in deterministic row-major order, bottom row first."""
    sites = []

    def add(x, y, role):
        sites.append((x, y, role))

    if spec.kind == SQUARE:
        for y in range(1, spec.Ly + 1):
            for x in range(spec.Lx):
                add(x, y, PLAIN)
    else:
        if spec.bottom == "rough":
            for x in range(spec.Lx):
                add(x, 0, VEDGE)  # dangling edge below (x, 1)
        n_h = spec.Lx if spec.x_periodic else spec.Lx - 1
        for y in range(1, spec.Ly + 1):
            for x in range(spec.Lx):
                add(x, y, VERTEX)
                if x < n_h:
                    add(x, y, HEDGE)
            if y < spec.Ly:
                for x in range(spec.Lx):
                    add(x, y, VEDGE)
    # row-major enumeration is already sorted by construction; freeze indices
    return [SiteId(i, x, y, role) for i, (x, y, role) in enumerate(sites)]


def site_lookup(spec):
    """Map (x, y, role) -> SiteId."""
    return {(s.x, s.y, s.role): s for s in enumerate_sites(spec)}


def neighbors(spec, site, _lookup=None):
    """Adjacent sites; Lieb edges return their incident vertices and vice versa."""
    lk = _lookup if _lookup is not None else site_lookup(spec)
    if (site.x, site.y, site.role) not in lk:
        raise KeyError(f"unknown site {site}")

    def get(x, y, role):
        if spec.x_periodic:
            x %= spec.Lx
        return lk.get((x, y, role))

    out = []
    if spec.kind == SQUARE:
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            s = get(site.x + dx, site.y + dy, PLAIN)
            if s is not None:
                out.append(s)
    elif site.role == VERTEX:
        for cand in (
            get(site.x, site.y, HEDGE),
            get(site.x - 1, site.y, HEDGE),
            get(site.x, site.y, VEDGE),
            get(site.x, site.y - 1, VEDGE),
        ):
            if cand is not None:
                out.append(cand)
    elif site.role == HEDGE:
        out = [get(site.x, site.y, VERTEX), get(site.x + 1, site.y, VERTEX)]
        out = [s for s in out if s is not None]
    else:  # VEDGE between (x, y) and (x, y+1); y = 0 rows are dangling
        out = [s for s in (get(site.x, site.y, VERTEX), get(site.x, site.y + 1, VERTEX)) if s is not None]
    return out


def sublattice(spec, site):
    """Spin-carrying sites map to CIRC, coupling sites to BULLET."""
    if spec.kind == LIEB:
        return CIRC if site.role == VERTEX else BULLET
    return CIRC if (site.x + site.y) % 2 == 1 else BULLET


def boundary_sites(spec):
    """Unmeasured top-row sites (y = Ly), in enumeration order."""
    return [s for s in enumerate_sites(spec) if s.y == spec.Ly and s.role != VEDGE]


def bulk_sites(spec):
    """Measured sites: everything except the unmeasured top-row boundary."""
    top = {s.index for s in boundary_sites(spec)}
    return [s for s in enumerate_sites(spec) if s.index not in top]


def cz_pairs(spec, sites=None):
    """Entangling pairs defining the resource state (controlled-Z graph edges)."""
    sites = sites if sites is not None else enumerate_sites(spec)
    lk = {(s.x, s.y, s.role): s for s in sites}
    pairs = []
    if spec.kind == SQUARE:
        for s in sites:
            right = lk.get((((s.x + 1) % spec.Lx) if spec.x_periodic else s.x + 1, s.y, PLAIN))
            if right is not None and right.index != s.index:
                pairs.append((s.index, right.index))
            up = lk.get((s.x, s.y + 1, PLAIN))
            if up is not None:
                pairs.append((s.index, up.index))
    else:
        for s in sites:
            if s.role == VERTEX:
                continue
            for v in neighbors(spec, s, _lookup=lk):
                pairs.append((min(s.index, v.index), max(s.index, v.index)))
        pairs = sorted(set(pairs))
    return pairs


def site_count(spec):
    return len(enumerate_sites(spec))

"""Scaling fits, cross-ratio mutual-information scaling, data collapse and
phase classification. All fits are deterministic functions of the dataset.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

LN2 = math.log(2.0)

CSV_COLUMNS = ["lattice", "kind", "L", "p_x", "p_y", "p_z", "theta", "phi",
               "observable", "region", "mean", "sem", "n_traj", "seed",
               "max_bond", "discarded_weight"]


@dataclass
class Row:
    lattice: str
    kind: str
    L: int
    p_x: float = None
    p_y: float = None
    p_z: float = None
    theta: float = None
    phi: float = None
    observable: str = ""
    region: str = ""
    mean: float = 0.0
    sem: float = 0.0
    n_traj: int = 0
    seed: int = 0
    max_bond: int = None
    discarded_weight: float = None


@dataclass
class ScalingDataset:
    rows: list = field(default_factory=list)

    def add(self, **kw):
        self.rows.append(Row(**kw))

    def filter(self, **kw):
        out = [r for r in self.rows if all(getattr(r, k) == v for k, v in kw.items())]
        return ScalingDataset(out)

    def to_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(["" if getattr(r, c) is None else getattr(r, c) for c in CSV_COLUMNS])

    def to_csv_text(self):
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, fh):
        rd = csv.DictReader(fh)
        missing = [c for c in CSV_COLUMNS if c not in (rd.fieldnames or [])]
        if missing:
            raise ValueError(f"missing CSV columns: {', '.join(missing)}")
        ds = cls()
        for rec in rd:
            def num(key, cast=float):
                v = rec.get(key, "")
                return None if v == "" else cast(float(v))
            ds.add(lattice=rec["lattice"], kind=rec["kind"], L=int(float(rec["L"])),
                   p_x=num("p_x"), p_y=num("p_y"), p_z=num("p_z"),
                   theta=num("theta"), phi=num("phi"),
                   observable=rec["observable"], region=rec["region"],
                   mean=float(rec["mean"]), sem=float(rec["sem"] or 0.0),
                   n_traj=int(float(rec["n_traj"] or 0)), seed=int(float(rec["seed"] or 0)),
                   max_bond=num("max_bond", int), discarded_weight=num("discarded_weight"))
        return ds


@dataclass
class FitResult:
    model: str
    params: dict
    halfwidths: dict
    residual: float
    meta: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps({"model": self.model, "params": self.params,
                           "halfwidths": self.halfwidths, "residual": self.residual,
                           "meta": self.meta}, indent=1, sort_keys=True)


def _lstsq_fit(A, y):
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = A @ coef
    rss = float(np.sum((y - pred) ** 2))
    n, k = A.shape
    cov_scale = rss / max(n - k, 1)
    cov = cov_scale * np.linalg.pinv(A.T @ A)
    return coef, rss, np.sqrt(np.maximum(np.diag(cov), 0.0))


def log_sine_fit(points, L, window=(0.1, 0.9)):
    """Fit S = a * ln sin(pi L_A / L) + b over (L_A, S) pairs.

    Points outside the window (fractions of L) are dropped; at least 4 must
    survive and the abscissae must not be degenerate.
    """
    pts = [(la, s) for la, s in points if window[0] * L <= la <= window[1] * L and 0 < la < L]
    if len(pts) < 4:
        raise ValueError("need at least 4 points inside the fit window")
    las = np.array([p[0] for p in pts], dtype=float)
    ys = np.array([p[1] for p in pts], dtype=float)
    xs = np.log(np.sin(np.pi * las / L))
    if np.ptp(xs) < 1e-12:
        raise ValueError("degenerate abscissae")
    A = np.vstack([xs, np.ones_like(xs)]).T
    coef, rss, hw = _lstsq_fit(A, ys)
    return FitResult(model="log_sine", params={"a": float(coef[0]), "b": float(coef[1])},
                     halfwidths={"a": float(hw[0]), "b": float(hw[1])}, residual=rss,
                     meta={"L": L, "window": list(window), "n_points": len(pts)})


def cross_ratio(x1, x2, x3, x4, L):
    """Chord-distance cross ratio of four cyclically ordered ring points."""
    def chord(a, b):
        return (L / math.pi) * math.sin(math.pi * abs(a - b) / L)
    x12, x34, x13, x24 = chord(x1, x2), chord(x3, x4), chord(x1, x3), chord(x2, x4)
    if x12 == 0 or x34 == 0 or x13 == 0 or x24 == 0:
        raise ValueError("coincident endpoints")
    eta = (x12 * x34) / (x13 * x24)
    if not (0.0 < eta < 1.0):
        raise ValueError(f"cross ratio {eta} outside (0,1); check cyclic order")
    return eta


def power_fit(pairs, window=0.3):
    """Log-log fit I ~ chi^Delta over pairs (chi, I) with chi <= window."""
    pts = [(c, v) for c, v in pairs if 0 < c <= window and v > 0]
    if len(pts) < 3:
        raise ValueError("need at least 3 positive points in the window")
    xs = np.log(np.array([p[0] for p in pts]))
    ys = np.log(np.array([p[1] for p in pts]))
    A = np.vstack([xs, np.ones_like(xs)]).T
    coef, rss, hw = _lstsq_fit(A, ys)
    return FitResult(model="power", params={"Delta": float(coef[0]), "lnC": float(coef[1])},
                     halfwidths={"Delta": float(hw[0]), "lnC": float(hw[1])}, residual=rss,
                     meta={"window": window, "n_points": len(pts)})


def _collapse_objective(curves, pc, nu):
    """Summed squared deviation from the local-linear master curve.

    curves: list of (L, p array, y array). Each point is compared with the
    linear interpolant through the scaled points of the *other* sizes.
    """
    scaled = []
    for L, ps, ys in curves:
        u = (ps - pc) * (L ** (1.0 / nu))
        scaled.append((u, ys))
    total = 0.0
    count = 0
    for i, (u_i, y_i) in enumerate(scaled):
        others_u = np.concatenate([scaled[j][0] for j in range(len(scaled)) if j != i])
        others_y = np.concatenate([scaled[j][1] for j in range(len(scaled)) if j != i])
        order = np.argsort(others_u)
        ou, oy = others_u[order], others_y[order]
        for u, y in zip(u_i, y_i):
            k = np.searchsorted(ou, u)
            if k == 0 or k == len(ou):
                continue
            u0, u1 = ou[k - 1], ou[k]
            y0, y1 = oy[k - 1], oy[k]
            t = 0.0 if u1 == u0 else (u - u0) / (u1 - u0)
            total += (y - (y0 + t * (y1 - y0))) ** 2
            count += 1
    return total / max(count, 1)


def _golden(f, lo, hi, iters=40):
    g = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - g * (b - a)
    d = a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def collapse(dataset_points, pc_box, nu_box, grid=21):
    """Scaling collapse y(L, p) = f(L^{1/nu} (p - p_c)).

    dataset_points: list of (L, p, y[, sem]) tuples with >= 3 distinct sizes.
    Deterministic coarse grid over the search boxes followed by alternating
    golden-section refinements. Returns a FitResult with p_c, nu, quality.
    """
    byL = {}
    for tup in dataset_points:
        L, p, y = tup[0], tup[1], tup[2]
        byL.setdefault(int(L), []).append((float(p), float(y)))
    if len(byL) < 3:
        raise ValueError("collapse needs at least 3 distinct sizes")
    if pc_box[0] >= pc_box[1] or nu_box[0] >= nu_box[1]:
        raise ValueError("degenerate search box")
    curves = []
    for L in sorted(byL):
        pts = sorted(byL[L])
        curves.append((L, np.array([p for p, _ in pts]), np.array([y for _, y in pts])))

    best = (math.inf, None, None)
    for pc in np.linspace(pc_box[0], pc_box[1], grid):
        for nu in np.linspace(nu_box[0], nu_box[1], grid):
            val = _collapse_objective(curves, pc, nu)
            if val < best[0]:
                best = (val, pc, nu)
    _, pc, nu = best
    step_p = (pc_box[1] - pc_box[0]) / (grid - 1)
    step_n = (nu_box[1] - nu_box[0]) / (grid - 1)
    for _ in range(4):
        pc = _golden(lambda v: _collapse_objective(curves, v, nu),
                     max(pc_box[0], pc - 2 * step_p), min(pc_box[1], pc + 2 * step_p))
        nu = _golden(lambda v: _collapse_objective(curves, pc, v),
                     max(nu_box[0], nu - 2 * step_n), min(nu_box[1], nu + 2 * step_n))
    q = _collapse_objective(curves, pc, nu)

    def halfwidth(coord):
        # parameter interval inside which the objective stays below 2x minimum
        lo, hi = (pc_box if coord == "pc" else nu_box)
        base = pc if coord == "pc" else nu
        span = (hi - lo)
        for frac in np.linspace(0.01, 0.5, 50):
            delta = frac * span
            vals = []
            for sgn in (-1, 1):
                v = min(max(base + sgn * delta, lo), hi)
                vals.append(_collapse_objective(curves, v if coord == "pc" else pc,
                                                nu if coord == "pc" else v))
            if min(vals) > 2.0 * max(q, 1e-12):
                return delta
        return 0.5 * span

    return FitResult(model="collapse",
                     params={"p_c": float(pc), "nu": float(nu), "quality": float(q)},
                     halfwidths={"p_c": float(halfwidth("pc")), "nu": float(halfwidth("nu"))},
                     residual=float(q),
                     meta={"pc_box": list(pc_box), "nu_box": list(nu_box),
                           "sizes": sorted(byL), "grid": grid})


def phase_classify(series):
    """Classify S(L) at fixed fractional cut as area / log / volume.

    series: (L, S) pairs, >= 4 sizes. Model selection among a constant,
    a + b ln L and a + b L by AIC-style penalized residuals; a growing model
    only wins when its slope is resolved (3 half-widths away from zero),
    otherwise saturating noisy curves would masquerade as growth.
    """
    pts = sorted(series)
    if len(pts) < 4:
        raise ValueError("need at least 4 sizes")
    Ls = np.array([p[0] for p in pts], dtype=float)
    ys = np.array([p[1] for p in pts], dtype=float)
    n = len(Ls)
    ones = np.ones_like(Ls)
    fits = {}
    for tag, A in (("area", ones[:, None]),
                   ("log", np.vstack([ones, np.log(Ls)]).T),
                   ("volume", np.vstack([ones, Ls]).T)):
        coef, rss, hw = _lstsq_fit(A, ys)
        k = A.shape[1]
        score = n * math.log(max(rss, 1e-30) / n) + 2 * k
        fits[tag] = (score, coef, rss, hw)
    tag = min(fits, key=lambda t: fits[t][0])
    score, coef, rss, hw = fits[tag]
    if tag != "area":
        slope_hw = float(hw[1]) if len(hw) > 1 else 0.0
        if abs(float(coef[1])) < 3.0 * slope_hw:
            tag = "area"
            score, coef, rss, hw = fits["area"]
    slope = float(coef[1]) if len(coef) > 1 else 0.0
    return FitResult(model=tag, params={"slope": slope, "offset": float(coef[0])},
                     halfwidths={"slope": float(hw[1]) if len(hw) > 1 else 0.0},
                     residual=rss, meta={"scores": {t: fits[t][0] for t in fits}})

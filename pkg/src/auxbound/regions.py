"""Empirical boundary scans in coordinate planes and certified-ellipsoid containment."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .dynamics import IntegratorConfig, escapes_batch
from .errors import DegeneratePlane

log = logging.getLogger(__name__)

BOUNDARY = "boundary"
UNBOUNDED = "unbounded_within_cap"
ESCAPES_AT_START = "escapes_at_start"


@dataclass(frozen=True)
class PolarScanConfig:
    angle_step: float = math.pi / 60
    radial_start: float = 0.05
    radial_growth: float = 1.2
    radial_cap: float = 10.0
    horizon: float = 100.0
    planes: tuple = ((0, 1),)
    rel_tol: float = 1e-2
    rtol: float = 1e-7
    atol: float = 1e-10
    t0: float | None = None         # None: use the spec's t0

    def __post_init__(self):
        if not 0 < self.angle_step <= math.pi / 4:
            raise ValueError("angle_step must lie in (0, pi/4]")
        if not self.radial_growth > 1:
            raise ValueError("radial_growth must exceed 1")
        if not 0 < self.radial_start < self.radial_cap:
            raise ValueError("need 0 < radial_start < radial_cap")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")

    def angles(self):
        k = int(round(2 * math.pi / self.angle_step))
        return np.arange(k) * (2 * math.pi / k)

    def integrator(self):
        return IntegratorConfig(rtol=self.rtol, atol=self.atol, horizon=self.horizon)


@dataclass(frozen=True)
class BoundaryPoint:
    angle: float
    radius: float
    x_i: float
    x_j: float
    status: str


@dataclass
class RegionBoundary:
    plane: tuple
    points: list
    metadata: dict = field(default_factory=dict)

    def radii(self):
        return np.array([p.radius for p in self.points])

    def angles(self):
        return np.array([p.angle for p in self.points])


def _states(n, plane, angles, radii):
    i, j = plane
    X = np.zeros((len(angles), n))
    X[:, i] = radii * np.cos(angles)
    X[:, j] = radii * np.sin(angles)
    return X


def scan_plane(spec, plane, cfg=PolarScanConfig()):
    """Blow-up radius along every ray of one coordinate plane, other coordinates zero.

    Rays advance geometrically from radial_start until the trajectory escapes,
    then the last bracket is bisected to rel_tol; all rays of a round are
    integrated together.
    """
    i, j = plane
    if not (0 <= i < spec.n and 0 <= j < spec.n and i != j):
        raise ValueError(f"bad plane {plane} for n = {spec.n}")
    t0 = spec.t0 if cfg.t0 is None else cfg.t0
    icfg = cfg.integrator()
    angles = cfg.angles()
    m = len(angles)

    def probe(idx, radii):
        X = _states(spec.n, plane, angles[idx], radii)
        return escapes_batch(spec.rhs_batch, X, icfg, t0)

    lo = np.zeros(m)
    hi = np.full(m, np.inf)
    r = cfg.radial_start
    pending = np.arange(m)
    while pending.size and r <= cfg.radial_cap * (1 + 1e-12):
        esc = probe(pending, np.full(pending.size, r))
        hi[pending[esc]] = r
        lo[pending[~esc]] = r
        pending = pending[~esc]
        r = min(r * cfg.radial_growth, cfg.radial_cap) if r < cfg.radial_cap else np.inf
    # rays escaping at the very first probe are walked inward before bisection
    down = np.flatnonzero(np.isfinite(hi) & (lo == 0))
    floor = cfg.radial_start * 1e-3
    while down.size:
        r_dn = hi[down] / cfg.radial_growth
        esc = probe(down, r_dn)
        hi[down[esc]] = r_dn[esc]
        lo[down[~esc]] = r_dn[~esc]
        down = down[esc & (r_dn > floor)]
    todo = np.flatnonzero(np.isfinite(hi) & (lo > 0))
    while todo.size:
        todo = todo[(hi[todo] - lo[todo]) > cfg.rel_tol * hi[todo]]
        if not todo.size:
            break
        mid = 0.5 * (lo[todo] + hi[todo])
        esc = probe(todo, mid)
        hi[todo[esc]] = mid[esc]
        lo[todo[~esc]] = mid[~esc]
    # spot check of radial monotonicity: just past the boundary must still escape
    found = np.flatnonzero(np.isfinite(hi) & (lo > 0))
    nonmonotone = []
    if found.size:
        beyond = np.minimum(hi[found] * 1.5, cfg.radial_cap)
        keep = beyond > hi[found]
        if keep.any():
            esc = probe(found[keep], beyond[keep])
            nonmonotone = [float(angles[k]) for k in found[keep][~esc]]
            if nonmonotone:
                log.warning("plane %s: escape not monotone along %d ray(s)", plane,
                            len(nonmonotone))
    points = []
    for k, a in enumerate(angles):
        if not np.isfinite(hi[k]):
            status, rad = UNBOUNDED, cfg.radial_cap
        elif lo[k] == 0:
            status, rad = ESCAPES_AT_START, 0.0
        else:
            status, rad = BOUNDARY, lo[k]
        points.append(BoundaryPoint(float(a), float(rad), float(rad * math.cos(a)),
                                    float(rad * math.sin(a)), status))
    meta = {"t0": t0, "horizon": cfg.horizon, "slice": "other coordinates fixed at 0",
            "detector": asdict(icfg), "scan": asdict(replace(cfg, planes=tuple(cfg.planes))),
            "nonmonotone_angles": nonmonotone}
    return RegionBoundary(tuple(plane), points, meta)


def scan_region_2d(spec, cfg=PolarScanConfig()):
    if spec.n != 2:
        raise ValueError("scan_region_2d needs n = 2")
    return scan_plane(spec, (0, 1), cfg)


def scan_region_4d(spec, cfg=None):
    """Double-polar scans: (x1, x2) with (x3, x4) = 0 and vice versa, unless configured."""
    if spec.n != 4:
        raise ValueError("scan_region_4d needs n = 4")
    cfg = cfg or PolarScanConfig(planes=((0, 1), (2, 3)))
    return [scan_plane(spec, p, cfg) for p in cfg.planes]


@dataclass(frozen=True, eq=False)
class EllipseCurve:
    """Section of {||V^-1 x|| = radius} by a coordinate plane."""

    plane: tuple
    radius: float
    form: np.ndarray                # 2x2 real quadratic form Re(W^H W)
    angles: np.ndarray
    points: np.ndarray              # (n_points, 2)

    def radius_at(self, angle):
        angle = np.asarray(angle, dtype=float)
        u = np.stack([np.cos(angle), np.sin(angle)], axis=-1)
        q = np.einsum("...i,ij,...j->...", u, self.form, u)
        return self.radius / np.sqrt(q)


def ellipsoid_projection(est, eig, plane, n_points=360, cond_tol=1e-12):
    """Closed curve {x : ||V^-1 x|| = est.radius, x_k = 0 off the plane}."""
    radius = est.radius if hasattr(est, "radius") else float(est)
    if radius < 0:
        raise ValueError("radius must be >= 0")
    W = eig.V_inv[:, list(plane)]
    form = np.real(W.conj().T @ W)
    form = 0.5 * (form + form.T)
    w = np.linalg.eigvalsh(form)
    if w[0] <= cond_tol * w[-1]:
        raise DegeneratePlane(f"quadratic form on plane {plane} is singular (eigs {w})")
    angles = np.linspace(0.0, 2 * math.pi, n_points, endpoint=False)
    curve = EllipseCurve(tuple(plane), float(radius), form, angles, np.zeros((n_points, 2)))
    r = curve.radius_at(angles)
    pts = np.column_stack([r * np.cos(angles), r * np.sin(angles)])
    return replace(curve, points=pts)


@dataclass(frozen=True)
class ContainmentReport:
    plane: tuple
    violations: list
    min_ratio: float
    mean_ratio: float
    n_compared: int

    @property
    def passed(self):
        return not self.violations


def compare_regions(inner, outer):
    """Check the certified curve lies inside the scanned boundary ray by ray."""
    if tuple(inner.plane) != tuple(outer.plane):
        raise ValueError("inner and outer curves live on different planes")
    ratios, violations = [], []
    for p in outer.points:
        r_in = float(inner.radius_at(p.angle))
        ratio = math.inf if r_in == 0 else p.radius / r_in
        ratios.append(ratio)
        if ratio < 1.0:
            violations.append({"angle": p.angle, "inner": r_in, "outer": p.radius,
                               "status": p.status})
    finite = np.array(ratios, dtype=float)
    return ContainmentReport(tuple(outer.plane), violations, float(finite.min()),
                             float(finite.mean()), len(ratios))

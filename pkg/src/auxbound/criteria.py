"""Linear auxiliary equation and the stability / boundedness criteria built on it.

On the ball z <= z_hat the nonlinear auxiliary equation is dominated by

    Z' = mu(t, z_hat) Z + ||V^-1 eta(t)|| F0,   mu = alpha1 + ||G_-(t)|| + l2(t, z_hat),

whose solution is z0 Z_h + F0 Z_F.  Every sup over t >= t0 is taken on a finite
horizon and carries an attainment flag; anything that cannot be settled is
reported as horizon-inconclusive rather than certified.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.integrate import cumulative_simpson, trapezoid
from scipy.optimize import brentq, linprog, minimize_scalar

from .bounds import linearize_l2
from .errors import (EmptyCertifiedInterval, HorizonInconclusive, NegativeRadius,
                     NoValidFit)

log = logging.getLogger(__name__)

EPS_NEG = 1e-3
SETTLE_RTOL = 1e-3

UNIFORM = "uniform-negative"
AVERAGE = "average"
INTEGRAL = "integral"
BOUNDED = "bounded"
MASSERA = "massera"

CERTIFIED = "certified"
NOT_CERTIFIED = "not-certified"
INCONCLUSIVE = "horizon-inconclusive"


def _memo_last(fn):
    """Cache fn(t) for the most recent grid array (the rate is reused across z_hat)."""
    cache = {}

    def wrapped(t):
        key = (id(t), np.shape(t))
        if cache.get("key") == key and cache["t"] is t:
            return cache["val"]
        val = np.asarray(fn(t), dtype=float)
        cache.update(key=key, t=t, val=val)
        return val

    return wrapped


@dataclass(eq=False)
class LinearAux:
    mu: object                      # (t array, z_hat) -> mu values
    f_norm: object                  # t array -> ||V^-1 eta(t)||
    t0: float = 0.0
    horizon: float = 200.0
    grid_step: float | None = None
    mu_sup: object = None           # z_hat -> sup_t mu from envelope constants
    alpha1: float | None = None
    g_norm: object = None           # t -> ||G_-(t)||, for the average decomposition
    L: object = None                # PolyBound, for the Massera split
    eps_neg: float = EPS_NEG
    _t: np.ndarray = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        step = self.grid_step or self.horizon / 20000
        npts = int(np.ceil(self.horizon / step)) + 1
        self._t = self.t0 + np.linspace(0.0, self.horizon, max(npts, 5))

    @property
    def t(self):
        return self._t

    def mu_grid(self, z_hat):
        if z_hat < 0:
            raise ValueError("z_hat must be >= 0")
        return np.broadcast_to(np.asarray(self.mu(self._t, z_hat), dtype=float),
                               self._t.shape).copy()

    def integral(self, z_hat):
        """I(t) = int_{t0}^t mu on the grid (log Z_h)."""
        return cumulative_simpson(self.mu_grid(z_hat), x=self._t, initial=0.0)

    def trailing_mean(self, z_hat, frac=0.5, I=None):
        I = self.integral(z_hat) if I is None else I
        k = int(len(self._t) * (1 - frac))
        return float((I[-1] - I[k]) / (self._t[-1] - self._t[k]))

    def sup_mu(self, z_hat):
        if self.mu_sup is not None:
            return float(self.mu_sup(z_hat))
        return float(self.mu_grid(z_hat).max())


def make_linear_aux(alpha1, g_norm, L, eta_norm, t0, horizon, grid_step=None, Gs=None,
                    eps_neg=EPS_NEG):
    """LinearAux for alpha1 + g(t) + l2(t, z_hat); Gs enables the analytic envelope."""
    rate = _memo_last(lambda t: alpha1 + np.asarray(g_norm(t), dtype=float))

    def mu(t, z_hat):
        return rate(t) + linearize_l2(L, z_hat)(t)

    mu_sup = None
    if Gs is not None:
        upper = L.upper().constant_table()

        def mu_sup(z_hat):
            return alpha1 + Gs + sum(a * z_hat ** (d - 1) for d, a in upper.items())

    return LinearAux(mu, eta_norm, t0, horizon, grid_step, mu_sup, alpha1, g_norm, L, eps_neg)


def constant_linear_aux(mu_of_zhat, c=1.0, t0=0.0, horizon=200.0, grid_step=None):
    """Time-independent mu(z_hat) with constant forcing profile c."""
    return LinearAux(lambda t, z: np.full(np.shape(t), float(mu_of_zhat(z))),
                     lambda t: np.full(np.shape(t), float(c)), t0, horizon, grid_step,
                     mu_sup=mu_of_zhat)


# -- sup of Z_h and Z_F ------------------------------------------------------

def _refined_max(t, mu, I):
    """max I with the peak located between nodes where mu changes sign."""
    k = int(np.argmax(I))
    best = I[k]
    for a in (k - 1, k):
        if a < 0 or a + 1 >= len(t):
            continue
        m0, m1 = mu[a], mu[a + 1]
        if m0 > 0 > m1:
            delta = (t[a + 1] - t[a]) * m0 / (m0 - m1)
            best = max(best, I[a] + 0.5 * m0 * delta)
    return float(best)


def compute_Zs(lin, z_hat, strict=True):
    """Z_s = sup_t exp(int mu); attained iff the trailing mean of mu is <= -eps_neg."""
    mu = lin.mu_grid(z_hat)
    I = cumulative_simpson(mu, x=lin.t, initial=0.0)
    # the peak must also sit before the final quarter, or a later one could exceed it
    tail = (3 * len(I)) // 4
    attained = (lin.trailing_mean(z_hat, I=I) <= -lin.eps_neg
                and I[tail:].max() < I[:tail].max())
    Zs = float(np.exp(max(0.0, _refined_max(lin.t, mu, I))))
    if strict and not attained:
        raise HorizonInconclusive(f"sup of Z_h not settled on horizon {lin.horizon:g} "
                                  f"at z_hat = {z_hat:.6g}")
    return Zs, bool(attained)


def _phis(x):
    """h-scaled integrals of e^{xs} and s e^{xs} over s in [0, 1]."""
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)
    e = np.expm1(xs)
    p1 = np.where(small, 1 + x / 2 + x * x / 6 + x ** 3 / 24, e / xs)
    p2 = np.where(small, 0.5 + x / 3 + x * x / 8 + x ** 3 / 30, (xs * (e + 1) - e) / xs ** 2)
    return p1, p2


def forced_response(t, I, f, block=512):
    """Z_F on the grid for Z' = mu Z + f, Z(t0) = 0, with I = int mu.

    Exponential integrator: I linear and f linear on each interval, integrated
    exactly; the linear recurrence is summed blockwise with local rescaling.
    """
    h = np.diff(t)
    dI = np.diff(I)
    p1, p2 = _phis(dI)
    # contribution of interval k, valued at its right end
    b = h * (f[1:] * p1 + (f[:-1] - f[1:]) * p2)
    Z = np.zeros_like(t)
    n = len(h)
    start = 0
    while start < n:
        stop = min(start + block, n)
        Ib = I[start:stop + 1] - I[start]
        while stop - start > 1 and np.ptp(Ib) > 300:
            stop = start + (stop - start) // 2
            Ib = I[start:stop + 1] - I[start]
        # Z_j = e^{Ib_j} (Z_s + sum_{k<j} b_k e^{-Ib_{k+1}})
        acc = np.cumsum(b[start:stop] * np.exp(-Ib[1:]))
        Z[start + 1:stop + 1] = np.exp(Ib[1:]) * (Z[start] + acc)
        start = stop
    return Z


def compute_rho(lin, z_hat, strict=True):
    """rho = sup_t Z_F; attained iff mu is eventually negative and the sup has settled."""
    mu = lin.mu_grid(z_hat)
    I = cumulative_simpson(mu, x=lin.t, initial=0.0)
    f = np.broadcast_to(np.asarray(lin.f_norm(lin.t), dtype=float), lin.t.shape)
    Z = forced_response(lin.t, I, f)
    rho = float(Z.max())
    k = int(0.75 * len(Z))
    early = float(Z[:k].max())
    settled = rho == 0.0 or (rho - early) <= SETTLE_RTOL * rho
    attained = bool(lin.trailing_mean(z_hat, I=I) <= -lin.eps_neg and settled)
    if strict and not attained:
        raise HorizonInconclusive(f"sup of Z_F not settled on horizon {lin.horizon:g} "
                                  f"at z_hat = {z_hat:.6g}")
    return rho, attained


# -- criteria ----------------------------------------------------------------

def check_uniform_negative(lin, z_hat_grid):
    """nu(z_hat) = -sup_t mu on the grid and the edge z_hat_nu of the positive run."""
    grid = np.asarray(z_hat_grid, dtype=float)
    nu = np.array([-lin.sup_mu(z) for z in grid])
    if nu.size == 0 or nu[0] <= 0:
        return nu, 0.0
    bad = np.flatnonzero(nu <= 0)
    if bad.size == 0:
        return nu, float(grid[-1])
    k = bad[0] - 1
    z_nu = brentq(lin.sup_mu, grid[k], grid[k + 1], xtol=1e-15, rtol=1e-15, maxiter=500)
    return nu, float(z_nu)


@dataclass(frozen=True)
class AverageCheck:
    phi: float
    fires: bool
    gamma: float | None
    g_av: float | None
    l2_av: float | None


def check_average(lin, z_hat, tol=1e-2):
    """Lyapunov-exponent criterion: phi = alpha1 + limsup average of m < 0."""
    I = lin.integral(z_hat)
    t = lin.t
    n = len(t)
    half, q3 = n // 2, (3 * n) // 4
    phi = float((I[-1] - I[half]) / (t[-1] - t[half]))
    m3 = (I[q3] - I[half]) / (t[q3] - t[half])
    m4 = (I[-1] - I[q3]) / (t[-1] - t[q3])
    if abs(m4 - m3) > tol:
        raise HorizonInconclusive(f"average of mu not settled ({m3:.4g} vs {m4:.4g})")
    gamma = g_av = l2_av = None
    if lin.alpha1 is not None:
        gamma = phi - lin.alpha1
        if lin.g_norm is not None:
            g = np.asarray(lin.g_norm(t[half:]), dtype=float)
            g_av = float(trapezoid(np.broadcast_to(g, t[half:].shape), t[half:])
                         / (t[-1] - t[half]))
            l2_av = gamma - g_av
    return AverageCheck(phi, bool(phi < -lin.eps_neg), gamma, g_av, l2_av)


ASYMPTOTIC = "asymptotic"
STABLE = "stable"


def check_integral_stability(lin, z_hat):
    """Classify int mu from its trailing-half slope: asymptotic, stable or not-certified."""
    I = lin.integral(z_hat)
    t = lin.t
    half = len(t) // 2
    slope = float(np.polyfit(t[half:] - t[half], I[half:], 1)[0])
    if slope < -lin.eps_neg:
        return ASYMPTOTIC
    if slope > lin.eps_neg:
        return NOT_CERTIFIED
    first = float(np.abs(I[:half]).max())
    second = float(np.abs(I[half:]).max())
    if second <= 2.0 * first + 1.0:
        return STABLE
    raise HorizonInconclusive(f"int mu has slope {slope:.3g} but keeps drifting")


# -- radii -------------------------------------------------------------------

@dataclass(frozen=True)
class RegionEstimate:
    radius: float
    kind: str                       # stability | asymptotic_stability | trapping
    t0: float
    provenance: str
    gain: float | None = None
    z_hat: float | None = None
    horizon: float | None = None
    z_interval: tuple | None = None

    def contains(self, x0, eig):
        return float(np.linalg.norm(eig.V_inv @ np.asarray(x0, dtype=float))) < self.radius

    def to_dict(self):
        return asdict(self)


def _maximize(objective, lo, hi, n_grid=101):
    """Bounded Brent search cross-checked on a 101-point grid; the grid wins ties."""
    if not hi > lo:
        raise EmptyCertifiedInterval(f"empty z_hat interval ({lo:.6g}, {hi:.6g})")
    grid = lo + (hi - lo) * np.arange(1, n_grid + 1) / (n_grid + 1)
    vals = np.array([objective(z) for z in grid])
    res = minimize_scalar(lambda z: -objective(z), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-10 * max(hi, 1e-12)})
    best_z, best = float(res.x), -float(res.fun)
    k = int(np.argmax(vals))
    if np.isfinite(vals[k]) and vals[k] > best * (1 + 1e-9) + 1e-300:
        a = grid[k - 1] if k > 0 else lo
        b = grid[k + 1] if k + 1 < len(grid) else hi
        loc = minimize_scalar(lambda z: -objective(z), bounds=(a, b), method="bounded",
                              options={"xatol": 1e-10 * max(hi, 1e-12)})
        best_z, best = (float(loc.x), -float(loc.fun)) if -loc.fun >= vals[k] else \
            (float(grid[k]), float(vals[k]))
    return best_z, best, vals


def _kind_at(lin, z_hat, default):
    try:
        status = check_integral_stability(lin, z_hat)
    except HorizonInconclusive:
        return default
    if status == ASYMPTOTIC:
        return "asymptotic_stability"
    if status == STABLE:
        return "stability"
    return default


def stability_radius(lin, z_hat_interval, provenance=INTEGRAL, kind=None):
    """sup over z_hat of z_hat / Z_s(z_hat): initial ellipsoid staying inside the ball."""
    lo, hi = (0.0, z_hat_interval) if np.ndim(z_hat_interval) == 0 else z_hat_interval
    inconclusive = []

    def objective(z):
        Zs, ok = compute_Zs(lin, z, strict=False)
        if not ok:
            inconclusive.append(z)
            return -np.inf
        return z / Zs

    z_star, best, _ = _maximize(objective, float(lo), float(hi))
    if not np.isfinite(best) or best <= 0:
        if inconclusive:
            raise HorizonInconclusive("Z_s not attained anywhere on the z_hat interval")
        raise EmptyCertifiedInterval("no z_hat with a finite Z_s")
    kind = kind or _kind_at(lin, z_star, "stability")
    return RegionEstimate(float(best), kind, lin.t0, provenance, None, z_star, lin.horizon,
                          (float(lo), float(hi)))


def boundedness_radius(lin, F0, z_hat_interval, norm_V=1.0, provenance=BOUNDED):
    """sup over z_hat of z_F = (z_hat - F0 rho) / Z_s, the trapping ellipsoid radius."""
    if F0 < 0:
        raise ValueError("F0 must be >= 0")
    if F0 == 0:
        return stability_radius(lin, z_hat_interval, provenance)
    lo, hi = (0.0, z_hat_interval) if np.ndim(z_hat_interval) == 0 else z_hat_interval
    inconclusive = []

    def objective(z):
        Zs, ok1 = compute_Zs(lin, z, strict=False)
        rho, ok2 = compute_rho(lin, z, strict=False)
        if z - F0 * rho <= 0:
            # the running sup already rules this z_hat out, settled or not
            return (z - F0 * rho) / Zs
        if not (ok1 and ok2):
            inconclusive.append(z)
            return -np.inf
        return (z - F0 * rho) / Zs

    z_star, best, vals = _maximize(objective, float(lo), float(hi))
    if not np.isfinite(best):
        raise HorizonInconclusive("rho not attained anywhere on the z_hat interval")
    if best <= 0:
        if inconclusive:
            raise HorizonInconclusive("rho settled only where F0 rho >= z_hat")
        raise NegativeRadius(f"F0 rho >= z_hat throughout (best z_F = {best:.4g})")
    kind_label = _kind_at(lin, z_star, "stability")
    gain = None
    if kind_label == "asymptotic_stability":
        gain = F0 * norm_V * compute_rho(lin, z_star, strict=False)[0]
    return RegionEstimate(float(best), "trapping", lin.t0, provenance, gain, z_star,
                          lin.horizon, (float(lo), float(hi)))


# -- Massera-type check --------------------------------------------------------

@dataclass(frozen=True)
class MasseraReport:
    zeta0: float
    zeta1: float
    zeta2: float
    r: float
    l3: float
    holds: bool
    advisory: bool = True


def _massera_lp(Psi, t, eps):
    i, j = np.tril_indices(len(t))          # pairs tau = t[j] <= t = t[i]
    dt = t[i] - t[j]
    zeta = Psi[i] - Psi[j]
    # zeta <= z0 - z1 dt + z2 tau  <=>  -z0 + z1 dt - z2 tau <= -zeta
    A = np.column_stack([-np.ones_like(dt), dt, -(t[j] - t[0])])
    T = t[-1] - t[0]
    res = linprog(c=[1.0, -0.5 * T, T], A_ub=A, b_ub=-zeta,
                  bounds=[(eps, None), (eps, None), (0.0, None)], method="highs")
    if res.status != 0:
        raise NoValidFit(f"linear program failed: {res.message}")
    return res.x


def check_massera(psi, r, l3, horizon, t0=0.0, n_grid=150, eps=1e-6):
    """Fit zeta(t, tau) = int_tau^t psi <= zeta0 - zeta1 (t - tau) + zeta2 tau.

    Advisory only: the companion smallness requirement on l3 has no explicit
    constant, so this never certifies a region by itself.
    """
    if not r > 1:
        raise ValueError("r must exceed 1")
    t = t0 + np.linspace(0.0, horizon, n_grid)
    fine = t0 + np.linspace(0.0, horizon, 20 * n_grid + 1)
    Psi = np.interp(t, fine, cumulative_simpson(np.broadcast_to(
        np.asarray(psi(fine), dtype=float), fine.shape), x=fine, initial=0.0))
    z0, z1, z2 = _massera_lp(Psi, t, eps)
    if z1 <= 10 * eps:
        raise NoValidFit("no decaying envelope: zeta grows at least linearly in t - tau")
    half = n_grid // 2 + 1
    z0h = _massera_lp(Psi[:half], t[:half], eps)[0]
    if z0 > 2.0 * z0h + 1e-6 * max(1.0, horizon):
        raise NoValidFit("fitted zeta0 keeps growing with the horizon")
    return MasseraReport(float(z0), float(z1), float(z2), float(r), float(l3),
                         bool((r - 1) * z1 >= z2))


# -- asymptotic gain -----------------------------------------------------------

def fit_exponential_envelope(lin, z_hat, margin=0.01):
    """(D, chi) with Z_h(t) <= D e^{-chi (t - t0)} on the horizon.

    chi is the least-squares decay rate of log Z_h; if the envelope is still
    being pushed up at the end of the horizon the rate is reduced by ``margin``.
    """
    I = lin.integral(z_hat)
    s = lin.t - lin.t0
    chi = -float(np.polyfit(s, I, 1)[0])
    if chi <= 0:
        raise NoValidFit("Z_h does not decay on the horizon")
    tail = int(0.9 * len(s))
    w = I + chi * s
    if w[tail:].max() > w[:tail].max() + 1e-9 * max(1.0, abs(w[:tail].max())):
        chi -= margin
        if chi <= 0:
            raise NoValidFit("decay rate vanishes after the margin")
        w = I + chi * s
    return float(np.exp(w.max())), chi


def asymptotic_gain_closed_forms(F0, norm_V, norm_V_inv, nu=None, D=None, chi=None):
    """limsup ||x|| bound from a uniform rate nu, or from an envelope D e^{-chi t}."""
    if nu is not None:
        if nu <= 0:
            raise ValueError("nu must be positive")
        return F0 * norm_V * norm_V_inv / nu
    if D is None or chi is None or chi <= 0:
        raise ValueError("need nu, or D and chi > 0")
    return F0 * norm_V * norm_V_inv * D / chi


# -- aggregation ---------------------------------------------------------------

@dataclass
class CriteriaReport:
    stable: str
    asymptotically_stable: str
    fired: list
    Z_s: float | None
    rho: float | None
    nu: float | None
    phi: float | None
    z_hat_star: float | None
    intervals: dict
    estimates: list
    horizon: float
    massera: MasseraReport | None = None
    notes: list = field(default_factory=list)
    variant: str = "refined"        # which perturbation norm fed mu: refined ||G_-|| or ||G||

    def to_dict(self):
        out = asdict(self)
        out["estimates"] = [e.to_dict() for e in self.estimates]
        return out


def _search_top(lin, z_cap):
    """Largest z_hat at which mu is still negative on average (no criterion beyond)."""
    def phi(z):
        return lin.trailing_mean(z) + lin.eps_neg

    if phi(0.0) >= 0:
        return 0.0
    hi = 1.0
    while phi(hi) < 0 and hi < z_cap:
        hi *= 2.0
    if phi(min(hi, z_cap)) < 0:
        return float(z_cap)
    return float(brentq(phi, hi / 2 if hi > 1 else 0.0, hi, xtol=1e-12))


def evaluate_criteria(lin, F0=0.0, norm_V=1.0, norm_V_inv=1.0, z_hat_max=None,
                      n_grid=101, z_cap=1e6):
    """Run every criterion on lin and collect the certified region estimates."""
    notes = []
    top = _search_top(lin, z_cap)
    if z_hat_max is not None:
        top = min(top, float(z_hat_max))
    fired, intervals, estimates = [], {}, []
    if top <= 0:
        return CriteriaReport(NOT_CERTIFIED, NOT_CERTIFIED, [], None, None, None,
                              lin.trailing_mean(0.0), None, {}, [], lin.horizon,
                              notes=["mu is not negative on average even at z_hat = 0"])
    grid = top * np.arange(1, n_grid + 1) / n_grid

    _, z_nu = check_uniform_negative(lin, grid)
    if z_nu > 0:
        fired.append(UNIFORM)
        intervals[UNIFORM] = (0.0, z_nu)

    z_phi = 0.0
    for z in grid:
        try:
            if not check_average(lin, z).fires:
                break
        except HorizonInconclusive:
            break
        z_phi = float(z)
    if z_phi > 0:
        fired.append(AVERAGE)
        intervals[AVERAGE] = (0.0, z_phi)

    z_b, any_inconclusive = 0.0, False
    for z in grid:
        try:
            status = check_integral_stability(lin, z)
        except HorizonInconclusive:
            any_inconclusive = True
            break
        if status == NOT_CERTIFIED:
            break
        z_b = float(z)
    if z_b > 0:
        fired.append(INTEGRAL)
        intervals[INTEGRAL] = (0.0, z_b)

    z_top = max([z_nu, z_phi, z_b, 0.0])
    stable = NOT_CERTIFIED
    asym = CERTIFIED if (UNIFORM in fired or AVERAGE in fired) else NOT_CERTIFIED
    Zs = rho = nu = phi = z_star = None
    if z_top > 0:
        prov = UNIFORM if UNIFORM in fired else (AVERAGE if AVERAGE in fired else INTEGRAL)
        kind = "asymptotic_stability" if asym == CERTIFIED else None
        try:
            est = stability_radius(lin, (0.0, z_top), prov, kind)
            # credit the criterion whose interval actually holds the maximizer
            holder = next(c for c in (UNIFORM, AVERAGE, INTEGRAL)
                          if c in intervals and est.z_hat <= intervals[c][1])
            if holder != prov:
                kind = "asymptotic_stability" if holder in (UNIFORM, AVERAGE) else None
                est = replace(est, provenance=holder,
                              kind=kind or _kind_at(lin, est.z_hat, "stability"))
            estimates.append(est)
            stable = CERTIFIED
            z_star = est.z_hat
            if est.kind == "asymptotic_stability":
                asym = CERTIFIED
        except HorizonInconclusive as exc:
            stable = INCONCLUSIVE
            notes.append(str(exc))
        except EmptyCertifiedInterval as exc:
            notes.append(str(exc))
    elif any_inconclusive:
        stable = INCONCLUSIVE

    if F0 > 0 and stable == CERTIFIED:
        try:
            est = boundedness_radius(lin, F0, (0.0, z_top), norm_V)
            estimates.append(est)
            fired.append(BOUNDED)
            z_star = est.z_hat
        except (NegativeRadius, HorizonInconclusive) as exc:
            notes.append(f"{BOUNDED}: {exc}")

    if z_star is not None:
        Zs = compute_Zs(lin, z_star, strict=False)[0]
        if F0 > 0:
            rho = compute_rho(lin, z_star, strict=False)[0]
        phi = lin.trailing_mean(z_star)
        if UNIFORM in fired and z_star <= intervals[UNIFORM][1]:
            nu = -lin.sup_mu(z_star)
    if asym != CERTIFIED and stable == INCONCLUSIVE:
        asym = INCONCLUSIVE

    massera = None
    if lin.L is not None and lin.alpha1 is not None and lin.g_norm is not None:
        massera = _massera_from_parts(lin, notes)
        if massera is not None and massera.holds:
            fired.append(MASSERA)

    return CriteriaReport(stable, asym, fired, Zs, rho, nu, phi, z_star, intervals,
                          estimates, lin.horizon, massera, notes)


def _massera_from_parts(lin, notes):
    degs = [d for d, _ in lin.L.terms if d > 1]
    if not degs:
        return None
    r = min(degs)
    l1 = lin.L.coeff(1)
    upper = lin.L.upper().constant_table()
    l3 = sum(a for d, a in upper.items() if d > 1)

    def psi(t):
        return lin.alpha1 + np.asarray(lin.g_norm(t), dtype=float) + l1(t)

    try:
        return check_massera(psi, r, l3, min(lin.horizon, 200.0), lin.t0)
    except NoValidFit as exc:
        notes.append(f"{MASSERA}: {exc}")
        return None

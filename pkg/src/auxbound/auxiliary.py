"""Scalar auxiliary equations whose solutions bound ||V^-1 x(t)|| from above.

    z' = (alpha1 + ||G_-(t)||) z + L(t, z) + ||F(t)||

plus its autonomous upper/lower bounding equations and their fixed points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .bounds import PolyBound
from .errors import BlowUp, KappaNonNegative, RootIsolationFailure

CONSERVATIVE = "conservative"
REFINED = "refined"
HOMOGENEOUS = "homogeneous"


def _zero(t):
    return np.zeros(np.shape(t)) if np.ndim(t) else 0.0


@dataclass(frozen=True, eq=False)
class ScalarAux:
    alpha1: float
    G_norm: object          # t -> ||G_-(t)|| (or ||G(t)|| for the conservative variant)
    L: PolyBound
    F_norm: object          # t -> ||F(t)||
    variant: str = REFINED
    t0: float = 0.0

    def rhs(self, t, z):
        return (self.alpha1 + self.G_norm(t)) * z + self.L(t, z) + self.F_norm(t)

    def describe(self):
        terms = [f"(alpha1 + ||G{'_-' if self.variant != CONSERVATIVE else ''}(t)||) z"]
        for d, c in self.L.terms:
            coef = f"{c(0.0):.6g}" if c.is_constant else "a(t)"
            terms.append(f"{coef} z^{d}")
        if self.F_norm is not _zero:
            terms.append("||F(t)||")
        return f"z' = {' + '.join(terms)},  alpha1 = {self.alpha1:.6g}"


def build_aux(alpha1, G_norm, L, F_norm=None, variant=REFINED, t0=0.0):
    """Assemble the nonlinear auxiliary equation; no forcing gives the homogeneous form."""
    if F_norm is None:
        return ScalarAux(alpha1, G_norm, L, _zero,
                         CONSERVATIVE if variant == CONSERVATIVE else HOMOGENEOUS, t0)
    return ScalarAux(alpha1, G_norm, L, F_norm, variant, t0)


def aux_from_maps(maps, L, variant=REFINED):
    """Auxiliary equation for the system behind ``maps`` (eigenbasis evaluators)."""
    g = maps.G_norm if variant == CONSERVATIVE else maps.G_minus_norm
    forced = maps.spec.forcing.F0 > 0 and variant != HOMOGENEOUS
    return build_aux(maps.eig.alpha1, g, L, maps.F_norm if forced else None,
                     variant, maps.spec.t0)


@dataclass(frozen=True)
class AutonomousAux:
    kappa: float
    L_env: PolyBound
    F_const: float
    direction: str = "upper"
    t0: float = 0.0

    def rhs(self, t, z):
        return self.kappa * z + self.L_env(0.0, z) + self.F_const

    def polynomial(self):
        table = self.L_env.constant_table()
        deg = max([1] + list(table))
        coef = np.zeros(deg + 1)
        coef[0] = self.F_const
        coef[1] = self.kappa
        for d, a in table.items():
            coef[d] += a
        return Polynomial(coef)


def build_autonomous(env, direction="upper", t0=0.0):
    if direction == "upper":
        aux = AutonomousAux(env.kappa_plus, env.L_plus, env.F_plus, "upper", t0)
    elif direction == "lower":
        aux = AutonomousAux(env.kappa_minus, env.L_minus, env.F_minus, "lower", t0)
    else:
        raise ValueError("direction must be 'upper' or 'lower'")
    if aux.kappa >= 0:
        raise KappaNonNegative(
            f"kappa_{'+' if direction == 'upper' else '-'} = {aux.kappa:.6g} >= 0: "
            "bounds over-conservative, all solutions of the bound diverge")
    return aux


@dataclass(frozen=True)
class FixedPoint:
    z: float
    stability: str          # stable | unstable | degenerate


@dataclass(frozen=True)
class FixedPointAnalysis:
    roots: tuple
    case: str

    def positive(self):
        return [r for r in self.roots if r.z > 0]

    @property
    def z_c1(self):
        """Smallest positive root that is not stable (escape threshold)."""
        return next((r.z for r in self.positive() if r.stability != "stable"), None)

    @property
    def z_c2(self):
        """Smallest positive stable root (attracting level)."""
        return next((r.z for r in self.positive() if r.stability == "stable"), None)


def default_search_limit(aux):
    kappa = abs(aux.kappa)
    scale = abs(aux.F_const / aux.kappa)
    if aux.L_env.terms:
        d, c = aux.L_env.leading()
        lead = c(0.0) if c.is_constant else c.envelope()
        if lead > 0 and d > 1:
            scale += (kappa / lead) ** (1.0 / (d - 1))
    return 10.0 * max(scale, 1.0)


def fixed_points(aux, z_max_search=None, merge_rtol=1e-6):
    """Nonnegative roots of kappa z + L(z) + F with stability tags and case label.

    Roots are isolated on monotone segments between critical points, so every
    simple root is bracketed by a sign change.
    """
    if aux.kappa >= 0:
        raise KappaNonNegative(f"kappa = {aux.kappa:.6g} >= 0")
    zmax = z_max_search or default_search_limit(aux)
    p = aux.polynomial()
    dp = p.deriv()
    scale = np.abs(p.coef).max() * max(1.0, zmax) ** p.degree()
    crit = sorted(float(r.real) for r in dp.roots()
                  if abs(r.imag) <= 1e-12 * max(1.0, abs(r)) and 0 < r.real < zmax)
    knots = [0.0] + crit + [zmax]
    found = []
    if p(0.0) == 0.0:
        found.append(0.0)
    for a, b in zip(knots[:-1], knots[1:]):
        pa, pb = p(a), p(b)
        if pa * pb < 0:
            found.append(brentq(p, a, b, xtol=1e-14, rtol=1e-14, maxiter=500))
    for c in crit:
        if abs(p(c)) <= 1e-12 * scale:
            found.append(c)
    found.sort()
    merged = []
    for z in found:
        if merged and abs(z - merged[-1][-1]) <= merge_rtol * max(abs(z), 1e-300):
            merged[-1].append(z)
        else:
            merged.append([z])
    roots = []
    for group in merged:
        z = float(np.mean(group))
        slope = dp(z)
        if len(group) > 1 or abs(slope) <= 1e-9 * max(1.0, np.abs(dp.coef).max()):
            stab = "degenerate"
        elif slope < 0:
            stab = "stable"
        else:
            stab = "unstable"
        roots.append(FixedPoint(z, stab))
    # two sign changes closer than the merge tolerance cannot be told apart
    for a, b in zip(roots[:-1], roots[1:]):
        if a.stability != "degenerate" and b.stability == a.stability:
            raise RootIsolationFailure(f"adjacent roots {a.z:.6g}, {b.z:.6g} share stability")
    return FixedPointAnalysis(tuple(roots), _classify(roots, aux.F_const))


def _classify(roots, F):
    pos = [r for r in roots if r.z > 0]
    if F > 0:
        if not pos:
            return "all_unbounded"
        if pos[0].stability == "degenerate":
            return "double_root"
        if len(pos) >= 2:
            return "two_roots"
        return "globally_bounded"
    if not pos:
        return "no_positive_root"
    if pos[0].stability == "degenerate":
        return "double_root"
    return "homogeneous_single_unstable"


@dataclass(frozen=True, eq=False)
class BernoulliSolution:
    times: np.ndarray
    values: np.ndarray


def bernoulli_solve(p_fn, q_fn, n_exp, z0, t_grid, rtol=1e-12, atol=1e-14):
    """Solve z' = p(t) z + q(t) z^n through u = z^(1-n), which obeys a linear ODE.

    u(t) = e^{(1-n)P(t)} (u0 + (1-n) int q e^{-(1-n)P}), P = int p; the two
    integrals are evaluated by adaptive quadrature on the grid.
    """
    if n_exp <= 1 or int(n_exp) != n_exp:
        raise ValueError("exponent must be an integer > 1")
    if z0 < 0:
        raise ValueError("z0 must be >= 0")
    t_grid = np.asarray(t_grid, dtype=float)
    if z0 == 0.0:
        return BernoulliSolution(t_grid, np.zeros_like(t_grid))
    k = 1.0 - n_exp
    u0 = z0 ** k

    def rhs(t, y):
        return [p_fn(t), k * q_fn(t) * np.exp(-k * y[0])]

    def denominator(t, y):
        return u0 + y[1]

    denominator.terminal = True
    denominator.direction = -1
    sol = solve_ivp(rhs, (t_grid[0], t_grid[-1]), [0.0, 0.0], method="DOP853",
                    t_eval=t_grid, rtol=rtol, atol=atol, events=denominator)
    P, J = sol.y
    values = (np.exp(k * P) * (u0 + J)) ** (1.0 / k)
    if sol.status == 1:
        raise BlowUp(float(sol.t_events[0][0]), sol.t, values)
    return BernoulliSolution(sol.t, values)

"""Scalar majorants of the nonlinearity and envelope constants."""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .system import TimeCoeff

log = logging.getLogger(__name__)

SAFETY_MARGIN = 0.02


def _sum_coeffs(coeffs):
    offset = sum(c.offset for c in coeffs)
    sins = tuple(s for c in coeffs for s in c.sinusoids)
    return TimeCoeff(offset, sins)


def _abs_bound(coeff):
    # |c(t)| is not a sinusoid sum; time-varying coefficients fall back to the envelope
    if coeff.is_constant:
        return abs(coeff(0.0))
    return coeff.envelope()


@dataclass(frozen=True)
class PolyBound:
    """L(t, z) = sum_d a_d(t) z^d with a_d(t) >= 0."""

    terms: tuple = ()       # ((degree, TimeCoeff), ...) sorted by degree

    def __post_init__(self):
        merged = defaultdict(list)
        for d, c in self.terms:
            if d < 1:
                raise ValueError("majorant degrees must be >= 1 so that L(t, 0) = 0")
            merged[int(d)].append(c if isinstance(c, TimeCoeff) else TimeCoeff.constant(c))
        terms = tuple((d, _sum_coeffs(cs)) for d, cs in sorted(merged.items()))
        for d, c in terms:
            if c.lower() < -1e-15:
                raise ValueError(f"coefficient of z^{d} can become negative")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_constants(cls, table):
        return cls(tuple((d, TimeCoeff.constant(a)) for d, a in dict(table).items()))

    @property
    def degrees(self):
        return [d for d, _ in self.terms]

    def is_zero(self):
        return all(c.envelope() == 0.0 for _, c in self.terms)

    def coeff(self, degree):
        for d, c in self.terms:
            if d == degree:
                return c
        return TimeCoeff()

    def __call__(self, t, z):
        out = 0.0
        for d, c in self.terms:
            out = out + c(t) * np.asarray(z, dtype=float) ** d
        return out

    def upper(self):
        """Constant-coefficient envelope sup_t L(t, z)."""
        return PolyBound.from_constants({d: c.offset + sum(abs(a) for a, _, _ in c.sinusoids)
                                         for d, c in self.terms})

    def lower(self):
        return PolyBound.from_constants({d: max(0.0, c.lower()) for d, c in self.terms})

    def constant_table(self):
        """{degree: coefficient} for constant-coefficient bounds (envelope otherwise)."""
        return {d: c(0.0) if c.is_constant else c.envelope() for d, c in self.terms}

    def leading(self):
        return self.terms[-1] if self.terms else (0, TimeCoeff())


def monomial_bound_x(f_terms):
    """Majorant of ||f*(t, x)|| in ||x|| using |x_i^k| <= ||x||^k and ||.||_2 <= ||.||_1."""
    table = defaultdict(float)
    for term in f_terms:
        table[term.degree] += _abs_bound(term.coeff)
    return PolyBound.from_constants(table)


def monomial_bound_y(f_terms, eig):
    """Majorant of ||V^-1 f*(t, V y)|| in z = ||y||.

    Component j of V y is bounded by (sum_k abs(v_jk)) ||y||, so a monomial
    c x^e contributes ||V^-1|| |c| prod_j (sum_k abs(v_jk))^e_j at degree |e|.
    """
    row_sums = np.abs(eig.V).sum(axis=1)
    table = defaultdict(float)
    for term in f_terms:
        factor = float(np.prod(row_sums ** np.asarray(term.exponents, dtype=float)))
        table[term.degree] += eig.norm_V_inv * _abs_bound(term.coeff) * factor
    return PolyBound.from_constants(table)


def linearize_l2(L, z_hat):
    """l2(t, z_hat) = sum_d a_d(t) z_hat^(d-1), so that L(t, z) <= l2 z on [0, z_hat]."""
    if z_hat < 0:
        raise ValueError("z_hat must be >= 0")
    coeffs = [c.scaled(float(z_hat) ** (d - 1)) for d, c in L.terms]
    return _sum_coeffs(coeffs) if coeffs else TimeCoeff()


def sup_norm_G(G_minus, t0, horizon, grid_step, safety_margin=SAFETY_MARGIN,
               shortest_period=None, chunk=20000):
    """Grid sup (with safety margin) and grid inf of ||G_-(t)|| on [t0, t0 + horizon]."""
    if shortest_period is not None and grid_step > shortest_period / 20:
        log.warning("grid step %.3g coarser than 1/20 of the shortest period %.3g",
                    grid_step, shortest_period)
    npts = int(np.ceil(horizon / grid_step)) + 1
    t_all = np.linspace(t0, t0 + horizon, npts)
    hi, lo = 0.0, np.inf
    for start in range(0, npts, chunk):
        t = t_all[start:start + chunk]
        M = G_minus(t)
        if not np.any(M):
            vals = np.zeros(len(t))
        else:
            vals = np.linalg.norm(M, ord=2, axis=(-2, -1))
        hi = max(hi, float(vals.max()))
        lo = min(lo, float(vals.min()))
    return hi * (1.0 + safety_margin), lo


@dataclass(frozen=True)
class EnvelopeConstants:
    Gs: float
    G_inf: float
    kappa_plus: float
    kappa_minus: float
    F_plus: float
    F_minus: float
    L_plus: PolyBound
    L_minus: PolyBound


def kappa_bounds(alpha1, Gs, G_inf, L, F_plus=0.0, F_minus=0.0):
    """Constants of the upper/lower autonomous bounding equations."""
    return EnvelopeConstants(Gs=Gs, G_inf=G_inf, kappa_plus=alpha1 + Gs,
                             kappa_minus=alpha1 + G_inf, F_plus=F_plus, F_minus=F_minus,
                             L_plus=L.upper(), L_minus=L.lower())


def forcing_envelopes(maps, horizon, grid_step):
    """(F0 ||V^-1||, F0 inf_t ||V^-1 eta(t)||) for the system behind ``maps``."""
    F0 = maps.spec.forcing.F0
    if F0 == 0.0:
        return 0.0, 0.0
    t = np.arange(maps.spec.t0, maps.spec.t0 + horizon + grid_step, grid_step)
    return F0 * maps.eig.norm_V_inv, float(np.min(maps.F_norm(t)))

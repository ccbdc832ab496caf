"""End-to-end analysis of a SystemSpec: eigenbasis, majorants, auxiliary equations."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .auxiliary import (CONSERVATIVE, HOMOGENEOUS, REFINED, aux_from_maps,
                        build_autonomous, fixed_points)
from .bounds import forcing_envelopes, kappa_bounds, monomial_bound_y, sup_norm_G
from .criteria import RegionEstimate, evaluate_criteria, make_linear_aux
from .dynamics import IntegratorConfig, escapes, threshold_bisect
from .errors import AuxboundError, KappaNonNegative, NoBracket
from .spectral import decompose, to_eigenbasis

log = logging.getLogger(__name__)

SLOW_PERIODS = 50
MIN_HORIZON = 200.0
POINTS_PER_PERIOD = 40


def default_horizon(spec):
    longest = spec.longest_period()
    return max(MIN_HORIZON, SLOW_PERIODS * longest) if longest else MIN_HORIZON


def default_grid_step(spec, horizon):
    shortest = spec.shortest_period()
    step = horizon / 4000
    if shortest:
        step = min(step, shortest / POINTS_PER_PERIOD)
    return step


@dataclass(eq=False)
class Analysis:
    spec: object
    eig: object
    maps: object
    L: object
    env: object
    aux: object
    aux_conservative: object
    horizon: float
    grid_step: float
    G_sup_full: float
    fixed: object = None
    notes: list = field(default_factory=list)

    @property
    def F0(self):
        return self.spec.forcing.F0

    def linear_aux(self, conservative=False, homogeneous=False):
        g = self.maps.G_norm if conservative else self.maps.G_minus_norm
        Gs = self.G_sup_full if conservative else self.env.Gs
        eta = (lambda t: np.zeros(np.shape(t))) if homogeneous else self.maps.eta_transformed_norm
        return make_linear_aux(self.eig.alpha1, g, self.L, eta, self.spec.t0, self.horizon,
                               self.grid_step, Gs=Gs)

    def criteria(self, conservative=False, n_grid=101):
        lin = self.linear_aux(conservative)
        return evaluate_criteria(lin, self.F0, self.eig.norm_V, self.eig.norm_V_inv,
                                 n_grid=n_grid)

    def best_criteria(self, n_grid=101):
        """Criteria with ||G_-|| and with ||G||; the larger certified radius wins.

        Dropping the imaginary diagonal is not a pointwise contraction in
        general, so neither variant is assumed to dominate.
        """
        refined = self.criteria(False, n_grid)
        conservative = self.criteria(True, n_grid)

        def top(rep):
            return max((e.radius for e in rep.estimates), default=0.0)

        if top(conservative) > top(refined):
            conservative.variant = "conservative"
            conservative.notes.append(
                f"conservative ||G|| variant certified the larger radius "
                f"({top(conservative):.6g} vs {top(refined):.6g})")
            return conservative
        refined.notes.append(f"refined ||G_-|| variant kept (conservative radius "
                             f"{top(conservative):.6g})")
        return refined

    def z_hat_max(self):
        """Radius of the ball on which the envelope rate stays negative (if any)."""
        table = self.env.L_plus.constant_table()
        kappa = self.env.kappa_plus
        if kappa >= 0:
            return 0.0
        if not table:
            return math.inf
        if set(table) == {max(table)} and max(table) > 1:
            d = max(table)
            return (-kappa / table[d]) ** (1.0 / (d - 1))

        def s(z):
            return kappa + sum(a * z ** (d - 1) for d, a in table.items())

        hi = 1.0
        while s(hi) < 0 and hi < 1e12:
            hi *= 2
        return float(brentq(s, 0.0, hi)) if s(0.0) < 0 else 0.0

    def threshold(self, cfg=None, z_lo=None, variant=None):
        """Escape threshold of the scalar auxiliary equation, as a RegionEstimate.

        The ellipsoid ||V^-1 x|| < z_bar lies in the stability region (F0 = 0)
        or in the trapping region (F0 > 0).
        """
        aux = self.aux if variant is None else aux_from_maps(self.maps, self.L, variant)
        cfg = cfg or IntegratorConfig(horizon=self.horizon, rtol=1e-9, atol=1e-12)
        guess = self.z_hat_max()
        guess = z_lo or (guess if 0 < guess < math.inf else 1.0)
        # walk by factors of two from the envelope radius until the bracket closes
        lo = hi = guess
        if escapes(aux.rhs, guess, cfg, aux.t0):
            for _ in range(40):
                lo /= 2
                if not escapes(aux.rhs, lo, cfg, aux.t0):
                    break
                hi = lo
            else:
                raise NoBracket(f"auxiliary solution from z0 = {lo:.3g} already escapes")
        else:
            for _ in range(60):
                hi *= 2
                if escapes(aux.rhs, hi, cfg, aux.t0):
                    break
                lo = hi
            else:
                raise NoBracket("no escape found for the auxiliary equation")
        z_bar = threshold_bisect(aux, lo, hi, 1e-3, cfg)
        forced = self.F0 > 0 and aux.variant != HOMOGENEOUS
        kind = "trapping" if forced else "stability"
        prov = "threshold-trapping" if forced else "threshold-stability"
        return RegionEstimate(z_bar, kind, self.spec.t0, prov, None, None, cfg.horizon)

    def to_dict(self):
        e = self.eig
        out = {
            "name": self.spec.name,
            "n": self.spec.n,
            "t0": self.spec.t0,
            "decomposition": {
                "alpha": e.alpha.tolist(), "beta": e.beta.tolist(),
                "norm_V": e.norm_V, "norm_V_inv": e.norm_V_inv, "cond_V": e.cond_V,
                "alpha1": e.alpha1,
            },
            "majorant": {str(d): a for d, a in self.L.upper().constant_table().items()},
            "sigma": sum(self.L.upper().constant_table().values()),
            "envelopes": {
                "Gs": self.env.Gs, "G_inf": self.env.G_inf, "G_sup_conservative": self.G_sup_full,
                "kappa_plus": self.env.kappa_plus, "kappa_minus": self.env.kappa_minus,
                "F_plus": self.env.F_plus, "F_minus": self.env.F_minus,
            },
            "F0": self.F0,
            "z_hat_max": self.z_hat_max(),
            "auxiliary_equation": self.aux.describe(),
            "variant": self.aux.variant,
            "horizon": self.horizon,
            "grid_step": self.grid_step,
            "notes": list(self.notes),
        }
        if self.fixed is not None:
            out["fixed_points"] = {
                "case": self.fixed.case,
                "roots": [{"z": r.z, "stability": r.stability} for r in self.fixed.roots],
            }
        return out


def analyze(spec, horizon=None, grid_step=None, safety_margin=0.02):
    """Build every bound needed by the criteria and region tools."""
    eig = decompose(spec.A)
    maps = to_eigenbasis(eig, spec)
    horizon = horizon or default_horizon(spec)
    grid_step = grid_step or default_grid_step(spec, horizon)
    L = monomial_bound_y(spec.f_terms, eig)
    period = spec.shortest_period()
    Gs, G_inf = sup_norm_G(maps.G_minus, spec.t0, horizon, grid_step, safety_margin, period)
    G_full, _ = sup_norm_G(maps.G, spec.t0, horizon, grid_step, safety_margin, period)
    F_plus, F_minus = forcing_envelopes(maps, horizon, grid_step)
    env = kappa_bounds(eig.alpha1, Gs, G_inf, L, F_plus, F_minus)
    variant = REFINED if spec.forcing.F0 > 0 else HOMOGENEOUS
    aux = aux_from_maps(maps, L, variant)
    aux_cons = aux_from_maps(maps, L, CONSERVATIVE)
    result = Analysis(spec, eig, maps, L, env, aux, aux_cons, horizon, grid_step, G_full)
    try:
        result.fixed = fixed_points(build_autonomous(env, "upper", spec.t0))
    except KappaNonNegative as exc:
        result.notes.append(str(exc))
    except AuxboundError as exc:
        result.notes.append(f"fixed points: {exc}")
    return result

"""Adaptive Runge-Kutta integration with blow-up detection.

All trajectories use the Dormand-Prince 5(4) pair with standard step control;
the blow-up detector looks at the norm history of accepted steps only.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import RK45

from .errors import NoBracket, StepUnderflow

log = logging.getLogger(__name__)

HORIZON_REACHED = "horizon_reached"
BLOW_UP = "blow_up"
CONVERGED = "converged_to_zero"


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float = np.inf
    norm_cap: float = 1e6
    growth_cap: float = 10.0
    horizon: float = 100.0
    zero_tol: float = 0.0           # stop once ||state|| <= zero_tol (0 disables)
    max_steps: int = 2_000_000

    def __post_init__(self):
        for name in ("rtol", "atol", "max_step", "norm_cap", "horizon"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.growth_cap > 1:
            raise ValueError("growth_cap must exceed 1")


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    norms: np.ndarray
    termination: str
    t_end: float

    @property
    def blew_up(self):
        return self.termination == BLOW_UP


def detect_blowup(norms, cfg):
    """True when the norm hits the cap or grew by growth_cap on two consecutive steps."""
    norms = np.asarray(norms, dtype=float)
    if norms.size == 0:
        return False
    if not np.isfinite(norms[-1]) or norms[-1] >= cfg.norm_cap:
        return True
    if norms.size < 3:
        return False
    n0, n1, n2 = norms[-3:]
    with np.errstate(divide="ignore", invalid="ignore"):
        return bool(n0 > 0 and n1 > 0 and n1 / n0 >= cfg.growth_cap and n2 / n1 >= cfg.growth_cap)


def integrate(rhs, state0, cfg=IntegratorConfig(), t0=0.0):
    """Integrate ``rhs(t, state)`` from ``t0`` over ``cfg.horizon``."""
    scalar = np.ndim(state0) == 0
    y0 = np.atleast_1d(np.asarray(state0, dtype=float))
    if not np.all(np.isfinite(y0)):
        raise ValueError("initial state must be finite")
    fun = (lambda t, y: np.atleast_1d(rhs(t, y[0]))) if scalar else rhs
    solver = RK45(fun, t0, y0, t0 + cfg.horizon, rtol=cfg.rtol, atol=cfg.atol,
                  max_step=cfg.max_step)
    times, states = [t0], [y0.copy()]
    norms = [float(np.linalg.norm(y0))]
    termination = HORIZON_REACHED
    if cfg.zero_tol and norms[0] <= cfg.zero_tol:
        termination = CONVERGED
    while termination == HORIZON_REACHED and solver.status == "running":
        with np.errstate(over="ignore", invalid="ignore"):
            solver.step()
        if solver.status == "failed":
            with np.errstate(over="ignore", invalid="ignore"):
                f_now = fun(solver.t, solver.y)
            if not np.all(np.isfinite(f_now)) or not np.all(np.isfinite(solver.y)):
                termination = BLOW_UP
                break
            raise StepUnderflow(f"step size underflow at t = {solver.t:.6g}", t=solver.t)
        times.append(solver.t)
        states.append(solver.y.copy())
        norms.append(float(np.linalg.norm(solver.y)))
        if detect_blowup(norms[-3:], cfg):
            termination = BLOW_UP
        elif cfg.zero_tol and norms[-1] <= cfg.zero_tol:
            termination = CONVERGED
        elif len(times) > cfg.max_steps:
            raise StepUnderflow(f"step budget exhausted at t = {solver.t:.6g}", t=solver.t)
    states = np.array(states)
    if scalar:
        states = states[:, 0]
    return Trajectory(np.array(times), states, np.array(norms), termination, float(times[-1]))


def escapes(rhs, state0, cfg, t0=0.0):
    """Blow-up classification used by threshold and region searches.

    Step underflow counts as escape: it only shows up once the norm is growing
    fast enough to defeat the step controller.
    """
    try:
        return integrate(rhs, state0, cfg, t0).blew_up
    except StepUnderflow as exc:
        log.info("treating step underflow at t=%.4g as escape", exc.t)
        return True


def escapes_batch(rhs_batch, X0, cfg, t0=0.0):
    """Escape flags for a stack of initial states integrated side by side.

    All members share one adaptive step sequence (so each is resolved at least
    as finely as it would be alone).  A member that trips the detector is
    frozen so it no longer drives the step size.
    """
    X0 = np.atleast_2d(np.asarray(X0, dtype=float))
    m, n = X0.shape
    if m == 0:
        return np.zeros(0, dtype=bool)
    active = np.ones(m, dtype=bool)
    escaped = np.zeros(m, dtype=bool)

    def fun(t, y):
        X = y.reshape(m, n)
        out = np.zeros_like(X)
        if active.any():
            out[active] = rhs_batch(t, X[active])
        return out.ravel()

    solver = RK45(fun, t0, X0.ravel(), t0 + cfg.horizon, rtol=cfg.rtol, atol=cfg.atol,
                  max_step=cfg.max_step)
    hist = [np.linalg.norm(X0, axis=1)]
    steps = 0
    while solver.status == "running" and active.any():
        with np.errstate(over="ignore", invalid="ignore"):
            solver.step()
        steps += 1
        X = solver.y.reshape(m, n)
        norms = np.linalg.norm(X, axis=1)
        bad = active & (~np.isfinite(norms) | (norms >= cfg.norm_cap))
        hist = (hist + [norms])[-3:]
        if len(hist) == 3:
            n0, n1, n2 = hist
            with np.errstate(divide="ignore", invalid="ignore"):
                fast = (n0 > 0) & (n1 / n0 >= cfg.growth_cap) & (n2 / n1 >= cfg.growth_cap)
            bad |= active & fast
        if bad.any():
            escaped |= bad
            active &= ~bad
            # restart from the current point so frozen members stop steering the step
            y = solver.y.copy()
            y[np.repeat(bad, n)] = 0.0
            solver = RK45(fun, solver.t, y, t0 + cfg.horizon, rtol=cfg.rtol,
                          atol=cfg.atol, max_step=cfg.max_step)
            hist = [np.linalg.norm(y.reshape(m, n), axis=1)]
        if solver.status == "failed":
            # step collapse: members still growing fastest are the escaping ones
            growing = active & (norms >= np.max(norms[active]) * 0.5)
            escaped |= growing
            active &= ~growing
            log.info("step collapse at t=%.4g in batch; %d member(s) marked escaped",
                     solver.t, int(growing.sum()))
            if not active.any():
                break
            y = solver.y.copy()
            y[np.repeat(~active, n)] = 0.0
            solver = RK45(fun, solver.t, y, t0 + cfg.horizon, rtol=cfg.rtol,
                          atol=cfg.atol, max_step=cfg.max_step)
        if steps > cfg.max_steps:
            raise StepUnderflow(f"step budget exhausted at t = {solver.t:.6g}", t=solver.t)
    return escaped


def threshold_bisect(aux, z_lo, z_hi, rel_tol=1e-3, cfg=IntegratorConfig()):
    """Initial value separating bounded from escaping solutions of a scalar equation.

    Solutions of a scalar ODE with unique solutions never cross, so escape is
    monotone in z0 and bisection is valid.  Returns the bounded end of the
    final bracket.
    """
    t0 = getattr(aux, "t0", 0.0)
    if escapes(aux.rhs, z_lo, cfg, t0):
        raise NoBracket(f"z0 = {z_lo:.6g} already escapes")
    if not escapes(aux.rhs, z_hi, cfg, t0):
        raise NoBracket(f"z0 = {z_hi:.6g} stays bounded over the horizon")
    lo, hi = float(z_lo), float(z_hi)
    while (hi - lo) > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if escapes(aux.rhs, mid, cfg, t0):
            hi = mid
        else:
            lo = mid
    return lo


@dataclass(frozen=True)
class BoundCheck:
    max_excess: float           # max over steps of ||x|| - ||V|| z
    max_rel_excess: float       # same, divided by 1 + ||V|| z
    passed: bool
    n_steps: int
    termination: str
    trajectory: Trajectory


def verify_bound(spec, eig, aux, x0, cfg=IntegratorConfig(), tol=1e-9):
    """Check ||x(t)|| <= ||V|| z(t) along a simulated trajectory.

    x and z are integrated as one augmented state so both are compared at the
    same accepted steps with no interpolation error.
    """
    n = spec.n
    x0 = np.asarray(x0, dtype=float)
    z0 = float(np.linalg.norm(eig.V_inv @ x0))

    def joint(t, s):
        out = np.empty(n + 1)
        out[:n] = spec.rhs(t, s[:n])
        out[n] = aux.rhs(t, s[n])
        return out

    traj = integrate(joint, np.append(x0, z0), cfg, spec.t0)
    xnorm = np.linalg.norm(traj.states[:, :n], axis=1)
    bound = eig.norm_V * traj.states[:, n]
    excess = xnorm - bound
    rel = excess / (1.0 + bound)
    return BoundCheck(float(excess.max()), float(rel.max()), bool(np.all(rel <= tol)),
                      len(traj.times), traj.termination, traj)


@dataclass(frozen=True)
class BatchBoundCheck:
    max_excess: np.ndarray      # per initial state
    max_rel_excess: np.ndarray
    passed: np.ndarray
    n_steps: int
    termination: str


def verify_bound_batch(spec, eig, aux, X0, cfg=IntegratorConfig(), tol=1e-9):
    """verify_bound for a stack of initial states sharing one step sequence.

    The shared steps are at least as fine as each member would take alone, and
    every accepted step is checked for every member.
    """
    X0 = np.atleast_2d(np.asarray(X0, dtype=float))
    m, n = X0.shape
    z0 = np.linalg.norm(X0 @ eig.V_inv.T, axis=1)

    def joint(t, s):
        S = s.reshape(m, n + 1)
        out = np.empty_like(S)
        out[:, :n] = spec.rhs_batch(t, S[:, :n])
        out[:, n] = aux.rhs(t, S[:, n])
        return out.ravel()

    traj = integrate(joint, np.column_stack([X0, z0]).ravel(), cfg, spec.t0)
    S = traj.states.reshape(len(traj.times), m, n + 1)
    xnorm = np.linalg.norm(S[:, :, :n], axis=2)
    bound = eig.norm_V * S[:, :, n]
    excess = xnorm - bound
    rel = excess / (1.0 + bound)
    return BatchBoundCheck(excess.max(axis=0), rel.max(axis=0), np.all(rel <= tol, axis=0),
                           len(traj.times), traj.termination)

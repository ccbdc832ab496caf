"""Acceptance suite: one PASS/FAIL line per criterion, at the stated tolerances.

Run with ``pytest -v tests/test_acceptance.py`` (the lines are printed even
under output capture) or directly with ``python3 tests/test_acceptance.py``.
"""

import json
import math
import sys
import time

import numpy as np
import pytest

from auxbound.auxiliary import AutonomousAux, bernoulli_solve, build_aux
from auxbound.benchmarks import BENCHMARKS, example2, load_benchmark
from auxbound.bounds import PolyBound, linearize_l2, monomial_bound_y
from auxbound.cli import main as cli_main
from auxbound.criteria import compute_rho, compute_Zs, constant_linear_aux, LinearAux
from auxbound.dynamics import (IntegratorConfig, escapes_batch, integrate, threshold_bisect,
                               verify_bound_batch)
from auxbound.pipeline import analyze
from auxbound.spectral import choose_lambda, fundamental_norm_check
from auxbound.system import spec_from_dict

COUPLED = {"d": 0.1}


class _Report:
    def __init__(self, capsys=None):
        self.capsys = capsys

    def __call__(self, number, title, ok, detail=""):
        line = f"[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {title}"
        if detail:
            line += f"  ({detail})"
        if self.capsys is not None:
            with self.capsys.disabled():
                print("\n" + line)
        else:
            print(line)


@pytest.fixture
def report(capsys):
    return _Report(capsys)


# 1 ---------------------------------------------------------------------------

def test_criterion_01_scalar_example(report):
    start = time.perf_counter()
    res = example2()
    elapsed = time.perf_counter() - start
    checks = res.checks()
    ok = {label: abs(v - e) <= tol for label, v, e, tol in checks}
    detail = ", ".join(f"{label}={v:.6g}{'' if ok[label] else ' (expected %g)' % e}"
                       for label, v, e, _ in checks if label != "threshold")
    passed = all(ok[k] for k in ok if k != "threshold") and elapsed < 1.0
    report(1, "scalar example regression", passed, f"{detail}, {elapsed:.2f} s")
    assert elapsed < 1.0
    for label, value, expected, tol in checks:
        assert abs(value - expected) <= tol, f"{label}: {value} vs {expected} +- {tol}"


# 2 ---------------------------------------------------------------------------

def test_criterion_02_choose_lambda_oracle(report):
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    worst = 0.0
    exact = True
    for _ in range(100):
        n = int(rng.integers(1, 9))
        alpha = np.sort(rng.uniform(-5, 5, size=n))[::-1]
        lam = np.arange(alpha.min() - 5, alpha.max() + 5 + 1e-12, 1e-4)
        M = lam + np.abs(alpha[None, :] - lam[:, None]).max(axis=1)
        lam_star, M_star = choose_lambda(alpha)
        exact &= M_star == alpha[0]
        M_at = lam_star + np.abs(alpha - lam_star).max()
        worst = max(worst, abs(M_at - M.min()), abs(M_star - M.min()))
    elapsed = time.perf_counter() - start
    ok = exact and worst <= 1e-9 and elapsed < 5.0
    report(2, "choose_lambda vs brute-force grid", ok,
           f"max |M - grid min| = {worst:.2e}, {elapsed:.2f} s")
    assert ok


# 3 ---------------------------------------------------------------------------

def _certified_radius(an):
    return max(e.radius for e in an.criteria().estimates)


def test_criterion_03_pointwise_bound(report):
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    worst, lines = -np.inf, []
    for name, params in (("planar_homogeneous", None), ("vdp", COUPLED), ("duffing", COUPLED)):
        spec = load_benchmark(name, params)
        an = analyze(spec)
        r = _certified_radius(an)
        X = rng.normal(size=(50, spec.n))
        scale = 0.9 * r * rng.uniform(size=50) ** (1 / spec.n)
        X *= (scale / np.linalg.norm(X @ an.eig.V_inv.T, axis=1))[:, None]
        check = verify_bound_batch(spec, an.eig, an.aux, X, IntegratorConfig(horizon=100.0))
        worst = max(worst, float(check.max_rel_excess.max()))
        lines.append(f"{name}: r={r:.4g}, {int((~check.passed).sum())} violations")
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 120
    report(3, "||x|| <= ||V|| z along trajectories", ok,
           "; ".join(lines) + f"; worst rel excess {worst:.2e}; {elapsed:.1f} s")
    assert ok


# 4 ---------------------------------------------------------------------------

def test_criterion_04_monotone_in_initial_value(report):
    rng = np.random.default_rng(4)
    violations = 0
    for _ in range(20):
        a1 = rng.uniform(-1.0, -0.1)
        g, w = rng.uniform(0, 0.3), rng.uniform(0.5, 4)
        sig, F, q = rng.uniform(0.05, 1.0), rng.uniform(0, 0.2), rng.uniform(0.5, 4)
        aux = build_aux(a1, lambda t, g=g, w=w: g * abs(math.sin(w * t)),
                        PolyBound.from_constants({3: sig}),
                        lambda t, F=F, q=q: F * abs(math.cos(q * t)))
        for _ in range(5):
            z_a, z_b = np.sort(rng.uniform(0, 2.0, size=2))
            traj = integrate(aux.rhs, np.array([z_a, z_b]),
                             IntegratorConfig(horizon=50.0, rtol=1e-10, atol=1e-12))
            lo, hi = traj.states[:, 0], traj.states[:, 1]
            violations += int(np.sum(lo > hi + 1e-9 * (1 + np.abs(hi))))
    report(4, "auxiliary solutions stay ordered", violations == 0, f"{violations} violations")
    assert violations == 0


# 5 ---------------------------------------------------------------------------

def _random_spec(rng):
    n = int(rng.choice([2, 3]))
    a, b = rng.uniform(0.5, 1.5), rng.uniform(0.1, 2.0)
    J = np.zeros((n, n))
    J[:2, :2] = [[-a, b], [-b, -a]]
    if n == 3:
        J[2, 2] = -rng.uniform(0.5, 1.5)
    P = np.eye(n) + 0.3 * rng.normal(size=(n, n))
    A = P @ J @ np.linalg.inv(P)
    gstar = [{"i": int(rng.integers(1, n + 1)), "j": int(rng.integers(1, n + 1)),
              "sinusoids": [{"amp": float(rng.uniform(0.1, 0.3)),
                             "freq": float(rng.uniform(0.5, 3.0))}]} for _ in range(2)]
    exps = [0] * n
    exps[int(rng.integers(n))] = 3
    doc = {"n": n, "A": A.tolist(), "Gstar": gstar,
           "f_terms": [{"component": int(rng.integers(1, n + 1)),
                        "coeff": float(rng.choice([-1, 1]) * rng.uniform(0.1, 0.5)),
                        "exponents": exps}],
           "forcing": {"F0": float(rng.choice([0.0, rng.uniform(0.01, 0.2)])),
                       "eta": [{"sinusoids": [{"amp": 1.0, "freq": float(rng.uniform(0.5, 3))}]}]
                       + [0.0] * (n - 1)}}
    return spec_from_dict(doc)


def test_criterion_05_comparison_chain(report):
    rng = np.random.default_rng(5)
    worst_cmp, worst_sup = -np.inf, 0.0
    for _ in range(20):
        spec = _random_spec(rng)
        an = analyze(spec, horizon=50.0)
        maps, aux, F0 = an.maps, an.aux, spec.forcing.F0
        z0 = rng.uniform(0.05, 0.3)
        z_hat = 2 * z0 + 0.2
        l2 = linearize_l2(an.L, z_hat)
        a1 = an.eig.alpha1

        def rhs(t, s):
            mu = a1 + maps.G_minus_norm(t) + l2(t)
            eta = maps.eta_transformed_norm(t) if F0 else 0.0
            # z only matters while it is inside the ball; freeze it well outside
            dz = aux.rhs(t, s[0]) if s[0] <= 2 * z_hat else 0.0
            return np.array([dz, mu * s[1] + F0 * eta, mu * s[2], mu * s[3] + eta])

        traj = integrate(rhs, np.array([z0, z0, 1.0, 0.0]),
                         IntegratorConfig(horizon=50.0, rtol=1e-11, atol=1e-14))
        z, Z, Zh, ZF = traj.states.T
        inside = np.cumprod(z <= z_hat).astype(bool)
        worst_cmp = max(worst_cmp, float(np.max((z - Z)[inside] / np.maximum(1.0, Z[inside]))))
        sup = np.abs(Z - (z0 * Zh + F0 * ZF)) / np.maximum(np.abs(Z), 1e-300)
        worst_sup = max(worst_sup, float(sup.max()))
    ok = worst_cmp <= 1e-7 and worst_sup <= 1e-8
    report(5, "z <= Z on the ball and Z = z0 Z_h + F0 Z_F", ok,
           f"max (z - Z) = {worst_cmp:.2e}, superposition rel err {worst_sup:.2e}")
    assert ok


# 6 ---------------------------------------------------------------------------

def test_criterion_06_closed_forms(report):
    rho, _ = compute_rho(constant_linear_aux(lambda z: -0.4, c=0.7, horizon=200.0,
                                             grid_step=0.05), 0.0)
    e_rho = abs(rho / (0.7 / 0.4) - 1)
    lin = LinearAux(lambda t, z: 0.5 - 0.1 * t, lambda t: np.ones(np.shape(t)), 0.0, 100.0, 0.005)
    Zs, _ = compute_Zs(lin, 0.0)
    e_zs = abs(Zs / math.exp(1.25) - 1)
    sol = bernoulli_solve(lambda t: -1.0, lambda t: 1.0, 3, 0.5, np.linspace(0, 1, 11))
    e_b = abs(sol.values[-1] - (3 * math.e ** 2 + 1) ** -0.5)
    ok = e_rho <= 1e-6 and e_zs <= 1e-6 and e_b <= 1e-6
    report(6, "closed-form quadratures", ok,
           f"rho rel {e_rho:.1e}, Z_s rel {e_zs:.1e}, Bernoulli abs {e_b:.1e}")
    assert ok


# 7 ---------------------------------------------------------------------------

def test_criterion_07_fundamental_matrix(report):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        beta = rng.uniform(-5, 5, size=int(rng.integers(1, 6)))
        worst = max(worst, fundamental_norm_check(rng.uniform(-2, 1), beta, rng.uniform(0, 5)))
    report(7, "||exp((lam I + i beta) dt)|| = e^(lam dt), ||w|| ||w^-1|| = 1", worst <= 1e-10,
           f"max deviation {worst:.1e}")
    assert worst <= 1e-10


# 8 ---------------------------------------------------------------------------

def _ray_states(radius, m=72):
    a = np.linspace(0, 2 * math.pi, m, endpoint=False)
    return radius * np.column_stack([np.cos(a), np.sin(a)])


def test_criterion_08_planar_stability_region(report):
    spec = load_benchmark("planar_homogeneous")
    an = analyze(spec)
    X0 = _ray_states(1.0)
    X0 *= (0.99 * math.sqrt(2) / np.linalg.norm(X0 @ an.eig.V_inv.T, axis=1))[:, None]
    m = len(X0)
    traj = integrate(lambda t, y: spec.rhs_batch(t, y.reshape(m, 2)).ravel(), X0.ravel(),
                     IntegratorConfig(horizon=200.0))
    final = np.linalg.norm(traj.states[-1].reshape(m, 2), axis=1)
    ratio = float(np.max(final / np.linalg.norm(X0, axis=1)))
    esc = escapes_batch(spec.rhs_batch, _ray_states(3.0), IntegratorConfig(horizon=200.0))
    ok = traj.termination == "horizon_reached" and ratio < 1e-3 and esc.any()
    report(8, "planar ellipsoid 0.99*sqrt(2) decays; z0 = 3 escapes somewhere", ok,
           f"max ||x(200)||/||x0|| = {ratio:.1e}, {int(esc.sum())}/{len(esc)} rays at 3 escape")
    assert ok


# 9 ---------------------------------------------------------------------------

def test_criterion_09_containment(report, tmp_path):
    start = time.perf_counter()
    summary, violations, compared = [], 0, 0
    for name in BENCHMARKS:
        args = ["region", "--benchmark-spec", name, "--angle-step", str(math.pi / 60),
                "--out", str(tmp_path / name)]
        if name in ("vdp", "duffing", "duffing_forced"):
            args += ["--param", "d=0.1"]
        assert cli_main(args) == 0
        data = json.loads((tmp_path / name / "containment.json").read_text())
        v = sum(len(r["violations"]) for r in data["results"])
        violations += v
        compared += len(data["results"])
        summary.append(f"{name}: {len(data['results'])} curve(s), {v} violations"
                       + ("" if data["results"] else " [no certified region]"))
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 900
    report(9, "certified ellipsoids inside scanned boundaries", ok,
           "; ".join(summary) + f"; {elapsed:.0f} s")
    assert ok


# 10 --------------------------------------------------------------------------

def test_criterion_10_threshold(report):
    cubic = AutonomousAux(-1.0, PolyBound.from_constants({3: 1.0}), 0.0)
    z1 = threshold_bisect(cubic, 0.5, 2.0, 1e-4, IntegratorConfig(horizon=60.0))
    ex2 = AutonomousAux(-0.2, PolyBound.from_constants({3: 0.1}), 0.1)
    z2 = threshold_bisect(ex2, 0.7, 1.5, 1e-4, IntegratorConfig(horizon=400.0))
    ok = abs(z1 - 1) <= 1e-3 and abs(z2 - 1) <= 1e-3
    report(10, "escape thresholds", ok, f"z' = -z + z^3: {z1:.5f}; forced cubic: {z2:.5f}")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))

"""Shipped benchmark systems and the scalar worked example with constant envelopes."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from importlib import resources

from .auxiliary import AutonomousAux, fixed_points
from .bounds import PolyBound
from .criteria import boundedness_radius, check_uniform_negative, constant_linear_aux
from .dynamics import IntegratorConfig, threshold_bisect
from .system import spec_from_dict

BENCHMARKS = ("planar_homogeneous", "planar_forced", "vdp", "duffing", "duffing_forced")

# coupling used whenever the caller does not pick one (it is not given with the
# original oscillator parameters)
DEFAULT_COUPLING = 0.1


def benchmark_document(name):
    if name not in BENCHMARKS:
        raise KeyError(f"unknown benchmark '{name}' (choose from {', '.join(BENCHMARKS)})")
    text = resources.files("auxbound.data").joinpath(f"{name}.json").read_text()
    return json.loads(text)


def load_benchmark(name, params=None):
    """SystemSpec for a shipped benchmark; ``params`` override the file defaults."""
    return spec_from_dict(benchmark_document(name), params)


@dataclass(frozen=True)
class ScalarExampleResult:
    roots: tuple
    case: str
    z_star: float
    z_s: float
    R: float
    threshold: float
    seconds: float

    def checks(self):
        """(label, value, expected, tolerance) rows for the pass/fail summary."""
        r = sorted(z for z in self.roots if z > 0)
        return [
            ("stable fixed point", r[0], (math.sqrt(5) - 1) / 2, 1e-3),
            ("unstable fixed point", r[1], 1.0, 1e-3),
            ("z_hat*", self.z_star, math.sqrt(2.0), 1e-9),
            ("z_s", self.z_s, 0.848, 5e-3),
            ("R", self.R, 0.07, 5e-3),
            ("threshold", self.threshold, 1.0, 1e-3),
        ]


def example2(alpha=0.3, Gs=0.1, sigma=0.1, F=0.1, horizon=400.0):
    """Scalar chain for the planar system with constant envelope constants.

    Rate -(alpha - Gs) + sigma z^2, forcing F with ||V^-1|| = 1.
    """
    start = time.perf_counter()
    kappa = -alpha + Gs
    aux = AutonomousAux(kappa, PolyBound.from_constants({3: sigma}), F)
    fpa = fixed_points(aux)
    lin = constant_linear_aux(lambda z: kappa + sigma * z * z, c=1.0, horizon=horizon,
                              grid_step=0.1)
    grid = [k * 2.0 / 200 for k in range(1, 201)]
    _, z_star = check_uniform_negative(lin, grid)
    est = boundedness_radius(lin, F, (0.0, z_star))
    z_bar = threshold_bisect(aux, 0.7, 1.5, 1e-3, IntegratorConfig(horizon=horizon))
    return ScalarExampleResult(tuple(r.z for r in fpa.roots), fpa.case, z_star, est.z_hat,
                          est.radius, z_bar, time.perf_counter() - start)

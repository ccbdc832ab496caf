"""Norm bounds, stability criteria and region estimates for time-varying nonlinear ODEs."""

from .auxiliary import (AutonomousAux, ScalarAux, bernoulli_solve, build_aux,
                        build_autonomous, fixed_points)
from .benchmarks import example2, load_benchmark
from .bounds import PolyBound, kappa_bounds, linearize_l2, monomial_bound_y, sup_norm_G
from .criteria import (CriteriaReport, LinearAux, RegionEstimate, boundedness_radius,
                       check_average, check_integral_stability, check_massera,
                       check_uniform_negative, compute_rho, compute_Zs,
                       evaluate_criteria, stability_radius)
from .dynamics import (IntegratorConfig, integrate, threshold_bisect, verify_bound,
                       verify_bound_batch)
from .pipeline import analyze
from .regions import (PolarScanConfig, compare_regions, ellipsoid_projection,
                      scan_region_2d, scan_region_4d)
from .spectral import choose_lambda, decompose, to_eigenbasis
from .system import SystemSpec, TimeCoeff, load_spec, spec_from_dict

__version__ = "0.1.0"

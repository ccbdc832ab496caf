import math

import pytest

from auxbound.benchmarks import BENCHMARKS, example2, load_benchmark
from auxbound.errors import SpecError
from auxbound.pipeline import analyze, default_grid_step, default_horizon


def test_scalar_example_reference_values():
    res = example2()
    pos = sorted(z for z in res.roots if z > 0)
    assert pos[0] == pytest.approx((math.sqrt(5) - 1) / 2, abs=1e-3)
    assert pos[1] == pytest.approx(1.0, abs=1e-3)
    assert res.case == "two_roots"
    assert res.z_star == pytest.approx(math.sqrt(2), abs=1e-9)
    assert res.R == pytest.approx(0.07, abs=5e-3)
    assert res.threshold == pytest.approx(1.0, abs=1e-3)


def test_every_benchmark_loads():
    for name in BENCHMARKS:
        params = {"d": 0.1} if name in ("vdp", "duffing", "duffing_forced") else None
        assert load_benchmark(name, params).n in (2, 4)
    with pytest.raises(KeyError):
        load_benchmark("nope")
    with pytest.raises(SpecError):
        load_benchmark("vdp")


def test_defaults_follow_the_slowest_and_fastest_terms():
    spec = load_benchmark("vdp", {"d": 0.1})
    h = default_horizon(spec)
    assert h == pytest.approx(max(200.0, 50 * 2 * math.pi / 3.1))
    assert default_grid_step(spec, h) == pytest.approx(2 * math.pi / 6.28 / 40)


def test_planar_analysis_report():
    an = analyze(load_benchmark("planar_homogeneous"))
    d = an.to_dict()
    assert d["sigma"] == pytest.approx(0.1, rel=1e-9)
    assert d["decomposition"]["alpha1"] == pytest.approx(-0.3)
    assert d["z_hat_max"] == pytest.approx(math.sqrt((0.3 - d["envelopes"]["Gs"]) / 0.1))
    assert d["variant"] == "homogeneous"
    assert d["fixed_points"]["case"] == "homogeneous_single_unstable"


def test_planar_threshold_and_criteria():
    an = analyze(load_benchmark("planar_homogeneous"))
    rep = an.criteria()
    assert rep.stable == "certified"
    est = rep.estimates[0]
    assert est.kind == "asymptotic_stability"
    assert 1.4 < est.radius < 1.6
    thr = an.threshold()
    assert thr.provenance == "threshold-stability"
    assert thr.radius >= est.radius * 0.99


def test_forced_planar_trapping_estimate():
    an = analyze(load_benchmark("planar_forced"))
    rep = an.criteria()
    trap = [e for e in rep.estimates if e.kind == "trapping"]
    assert len(trap) == 1 and trap[0].radius > 0
    assert trap[0].gain is not None and trap[0].gain > 0


def test_forced_duffing_has_no_trapping_certificate():
    an = analyze(load_benchmark("duffing_forced", {"d": 0.1}))
    rep = an.criteria()
    assert not [e for e in rep.estimates if e.kind == "trapping"]
    assert any("F0 rho >= z_hat" in n for n in rep.notes)

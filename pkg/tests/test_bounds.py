import math

import numpy as np
import pytest

from auxbound.benchmarks import load_benchmark
from auxbound.bounds import (PolyBound, forcing_envelopes, kappa_bounds, linearize_l2,
                             monomial_bound_x, monomial_bound_y, sup_norm_G)
from auxbound.spectral import decompose, to_eigenbasis
from auxbound.system import MonomialTerm, TimeCoeff

from conftest import make_spec


def term(comp, a, exps):
    return MonomialTerm(comp, TimeCoeff.constant(a), tuple(exps))


def test_degree_grouping_in_x():
    L = monomial_bound_x([term(0, -0.7, (3, 2)), term(1, 0.4, (0, 2))])
    assert L.constant_table() == {5: pytest.approx(0.7), 2: pytest.approx(0.4)}


def test_no_nonlinearity_gives_zero_majorant():
    L = monomial_bound_x([])
    assert L.terms == ()
    assert L(0.0, 3.0) == 0.0


def test_oscillator_cubics_share_a_degree():
    spec = load_benchmark("vdp", {"d": 0.1})
    assert monomial_bound_x(spec.f_terms).constant_table() == {3: pytest.approx(36.4)}


def test_identity_basis_matches_x_bound():
    terms = [term(0, 1.5, (2, 1)), term(1, -0.2, (0, 4))]
    eig = decompose(np.diag([-1.0, -3.0]))
    assert monomial_bound_y(terms, eig).constant_table() == pytest.approx(
        monomial_bound_x(terms).constant_table())


def test_planar_cubic_majorant():
    spec = load_benchmark("planar_homogeneous")
    eig = decompose(spec.A)
    eps = spec.f_terms[0].coeff(0.0)
    v = eig.V
    expected = eps * eig.norm_V_inv * (abs(v[1, 0]) + abs(v[1, 1])) ** 3
    table = monomial_bound_y(spec.f_terms, eig).constant_table()
    assert table == {3: pytest.approx(expected, rel=1e-12)}
    assert expected == pytest.approx(0.1, rel=1e-9)


def test_duffing_uses_first_and_third_rows():
    spec = load_benchmark("duffing", {"d": 0.1})
    eig = decompose(spec.A)
    v = np.abs(eig.V)
    mu1, mu2 = spec.params["mu1"], spec.params["mu2"]
    expected = eig.norm_V_inv * (mu1 * v[0].sum() ** 3 + mu2 * v[2].sum() ** 3)
    got = monomial_bound_y(spec.f_terms, eig).constant_table()[3]
    assert got == pytest.approx(expected, rel=1e-12)


def test_majorant_dominates_nonlinearity(rng):
    spec = load_benchmark("vdp", {"d": 0.1})
    eig = decompose(spec.A)
    L = monomial_bound_y(spec.f_terms, eig)
    for _ in range(200):
        y = rng.normal(size=4) + 1j * rng.normal(size=4)
        x = np.real(eig.V @ y)
        y = eig.V_inv @ x
        lhs = np.linalg.norm(eig.V_inv @ spec.nonlinearity(0.0, x))
        assert lhs <= L(0.0, np.linalg.norm(y)) * (1 + 1e-12)


def test_linearization():
    L3 = PolyBound.from_constants({3: 0.25})
    assert linearize_l2(L3, 2.0)(0.0) == pytest.approx(1.0)
    L13 = PolyBound.from_constants({1: 0.3, 3: 2.0})
    assert linearize_l2(L13, 0.0)(0.0) == pytest.approx(0.3)
    L25 = PolyBound.from_constants({2: 0.4, 5: 0.7})
    l2 = linearize_l2(L25, 1.0)(0.0)
    assert l2 == pytest.approx(1.1)
    z = np.linspace(0, 1, 1001)
    assert np.all(L25(0.0, z) <= l2 * z + 1e-15)


def test_negative_coefficient_rejected():
    with pytest.raises(ValueError):
        PolyBound.from_constants({2: -0.1})


def test_sup_norm_of_zero_perturbation():
    assert sup_norm_G(lambda t: np.zeros(np.shape(t) + (2, 2)), 0.0, 50.0, 0.01) == (0.0, 0.0)


def test_sup_norm_single_sinusoid():
    def G(t):
        out = np.zeros(np.shape(t) + (2, 2))
        out[..., 1, 0] = 0.1 * np.sin(t)
        return out

    Gs, G_inf = sup_norm_G(G, 0.0, 100.0, 0.01, safety_margin=0.02)
    assert Gs == pytest.approx(0.1 * 1.02, rel=1e-6)
    assert G_inf == pytest.approx(0.0, abs=1e-4)


def test_planar_envelope_is_near_point_one():
    spec = load_benchmark("planar_homogeneous")
    maps = to_eigenbasis(decompose(spec.A), spec)
    Gs, _ = sup_norm_G(maps.G_minus, 0.0, 400.0, 0.01, safety_margin=0.0)
    assert 0.095 <= Gs <= 0.1 + 1e-12


def test_kappa_constants():
    L = PolyBound.from_constants({3: 0.1})
    env = kappa_bounds(-0.3, 0.1, 0.0, L)
    assert env.kappa_plus == pytest.approx(-0.2)
    assert env.kappa_minus == pytest.approx(-0.3)
    assert env.L_plus.constant_table() == env.L_minus.constant_table() == {3: 0.1}


def test_time_varying_coefficient_envelopes():
    c = TimeCoeff(0.5, ((0.2, 1.0, 0.0),))
    env = kappa_bounds(-1.0, 0.0, 0.0, PolyBound(((3, c),)))
    assert env.L_plus.constant_table()[3] == pytest.approx(0.7)
    assert env.L_minus.constant_table()[3] == pytest.approx(0.3)


def test_unforced_system_has_zero_forcing_envelopes():
    spec = make_spec([[-1, 0], [0, -2]])
    maps = to_eigenbasis(decompose(spec.A), spec)
    assert forcing_envelopes(maps, 50.0, 0.1) == (0.0, 0.0)


def test_forcing_envelopes_bracket_norm():
    spec = load_benchmark("planar_forced")
    eig = decompose(spec.A)
    maps = to_eigenbasis(eig, spec)
    F_plus, F_minus = forcing_envelopes(maps, 100.0, 0.01)
    t = np.linspace(0, 100, 5001)
    F = maps.F_norm(t)
    assert F.max() <= F_plus * (1 + 1e-12)
    assert F_minus <= F.min() + 1e-12
    assert F_plus == pytest.approx(spec.forcing.F0 * eig.norm_V_inv)
    assert math.isclose(F_minus, 0.0, abs_tol=1e-3)

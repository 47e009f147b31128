import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from squidqkd.analytic import (KerrPhaseContext, Parity, cat_decomposition, cat_variance,
                               component_count, ensemble_noise, ensemble_noise_mc, noise_cab,
                               time_avg_noise, time_avg_noise_riemann, variance_closed_form)
from squidqkd.errors import NonRealResult, NotCoprime
from squidqkd.fock import (Quadrature, auto_dim, coherent_state, kerr_evolve, label_to_alpha,
                           overlap, quadrature_moments)
from squidqkd.validation import noise_numeric, random_labels


def test_phase_context_invariants():
    ctx = KerrPhaseContext.build(label_to_alpha(0.3, -0.7), 5.0, 1.0, np.linspace(0, 6, 7))
    assert np.allclose(np.abs(ctx.gamma), 1.0)
    assert ctx.xi == ctx.zeta - 1.0
    assert ctx.beta == pytest.approx(complex(-0.7, 0.3) / math.sqrt(2))


# -- variance --------------------------------------------------------------------

def test_variance_at_zero_time():
    for a in (0.0, 1 + 1j, -2.5j):
        for q in Quadrature:
            assert variance_closed_form(a, 5.0, 1.0, 0.0, q) == pytest.approx(0.5, abs=1e-12)


def test_variance_against_fock(rng):
    for a, t in zip(random_labels(rng, 200), rng.uniform(0, 2 * math.pi, 200)):
        s = kerr_evolve(coherent_state(a, auto_dim(a)), 5.0, 1.0, t)
        for q in Quadrature:
            assert variance_closed_form(a, 5.0, 1.0, t, q) == pytest.approx(
                quadrature_moments(s, q).variance, abs=1e-8)


def test_variance_even_cat_time():
    phi, v = 0.8, -0.4
    got = variance_closed_form(label_to_alpha(phi, v), 6.0, 1.0, math.pi / 2, Quadrature.PHI)
    assert got == pytest.approx(0.5 + phi ** 2 - math.exp(-2 * (phi ** 2 + v ** 2)) * v ** 2,
                                abs=1e-12)


def test_variance_product_structure():
    t = np.linspace(0, 2 * math.pi, 20001)
    a = label_to_alpha(0.3, 0.3)
    prod = (variance_closed_form(a, 5.0, 1.0, t, Quadrature.PHI)
            * variance_closed_form(a, 5.0, 1.0, t, Quadrature.V))
    assert prod.min() >= 0.25 - 1e-9
    near = np.abs(t - math.pi * np.round(t / math.pi)) < 0.05
    assert np.all(prod[~near] - 0.25 > 1e-6)
    for tr in (0.0, math.pi, 2 * math.pi):
        i = np.argmin(np.abs(t - tr))
        assert prod[i] == pytest.approx(0.25, abs=1e-9)


def test_variance_rejects_bad_inputs():
    with pytest.raises(ValueError):
        variance_closed_form(1.0, 5.0, 0.0, 1.0, Quadrature.PHI)
    with pytest.raises(ValueError):
        variance_closed_form(1.0, 5.0, 1.0, -1.0, Quadrature.PHI)


def test_nonreal_result_is_flagged():
    from squidqkd.analytic import _real
    with pytest.raises(NonRealResult):
        _real(1.0 + 1e-3j, "probe")
    assert _real(1.0 + 1e-14j, "probe") == 1.0


# -- cat variance ------------------------------------------------------------------

def test_cat_variance_origin():
    for parity in Parity:
        for q in Quadrature:
            assert cat_variance(0.0, 0.0, parity, q) == 0.5


def test_cat_variance_squeezed_inside_contour():
    assert cat_variance(0.0, 0.6, Parity.EVEN, Quadrature.PHI) < 0.5
    assert cat_variance(2.0, 2.0, Parity.EVEN, Quadrature.PHI) >= 0.5


def test_cat_variance_parity_swaps_quadratures():
    phi, v = np.meshgrid(np.linspace(-2, 2, 21), np.linspace(-2, 2, 21))
    assert np.array_equal(cat_variance(phi, v, Parity.ODD, Quadrature.PHI),
                          cat_variance(phi, v, Parity.EVEN, Quadrature.V))


@pytest.mark.parametrize("ratio,parity", [(6.0, Parity.EVEN), (100.0, Parity.EVEN),
                                          (5.0, Parity.ODD), (7.0, Parity.ODD)])
def test_cat_variance_matches_general_form(ratio, parity, rng):
    for phi, v in rng.uniform(-2, 2, size=(50, 2)):
        a = label_to_alpha(phi, v)
        for q in Quadrature:
            assert cat_variance(phi, v, parity, q) == pytest.approx(
                variance_closed_form(a, ratio, 1.0, math.pi / 2, q), abs=1e-12)


# -- cat decomposition ---------------------------------------------------------------

def test_half_revival_coefficients():
    dec = cat_decomposition(1, 2, 100.0, 1.0)
    assert dec.m == 2
    assert abs(dec.coefficients[0] - cmath.exp(1j * math.pi / 4) / math.sqrt(2)) < 1e-12
    assert abs(dec.coefficients[1] - cmath.exp(-1j * math.pi / 4) / math.sqrt(2)) < 1e-12


def test_component_count_rule():
    assert component_count(1, 3) == 6
    assert component_count(1, 2) == 2
    assert component_count(2, 3) == 3
    assert cat_decomposition(1, 3, 100.0, 1.0).m == 6


@pytest.mark.parametrize("p,q", [(1, 2), (1, 3), (2, 3), (1, 4), (3, 4), (2, 5)])
@pytest.mark.parametrize("ratio", [5.0, 6.0, 100.0])
def test_cat_reconstruction(p, q, ratio):
    for alpha in (0.7, 1.5 - 0.9j, 3.0j):
        dim = auto_dim(alpha)
        dec = cat_decomposition(p, q, ratio, alpha)
        rebuilt = dec.to_fock(dim)
        direct = kerr_evolve(coherent_state(alpha, dim), ratio, 1.0, math.pi * p / q)
        assert abs(abs(overlap(rebuilt, direct)) - 1) < 1e-9


def test_full_revival_decomposition():
    alpha = 1.2 + 0.3j
    dec = cat_decomposition(1, 1, 100.0, alpha)
    weights = np.abs(dec.coefficients)
    main = int(np.argmax(weights))
    assert weights[main] == pytest.approx(1.0, abs=1e-12)
    assert dec.components()[main] == pytest.approx(-alpha)
    dim = auto_dim(alpha)
    direct = kerr_evolve(coherent_state(alpha, dim), 100.0, 1.0, math.pi)
    assert abs(abs(overlap(dec.to_fock(dim), direct)) - 1) < 1e-9


def test_cat_decomposition_errors():
    with pytest.raises(NotCoprime):
        cat_decomposition(2, 4, 100.0, 1.0)
    with pytest.raises(ValueError):
        cat_decomposition(3, 2, 100.0, 1.0)


# -- noise ----------------------------------------------------------------------------

def test_noise_at_zero_time():
    for a in (0.0, 0.4 + 0.1j, -2j):
        for q in Quadrature:
            assert noise_cab(a, 100.0, 1.0, 0.0, q) == pytest.approx(0.5, abs=1e-12)


def test_noise_against_fock(rng):
    for a, t in zip(random_labels(rng, 200), rng.uniform(0, 2 * math.pi, 200)):
        s = kerr_evolve(coherent_state(a, auto_dim(a)), 5.0, 1.0, t)
        phi, v = math.sqrt(2) * a.real, math.sqrt(2) * a.imag
        assert noise_cab(a, 5.0, 1.0, t, Quadrature.PHI) == pytest.approx(
            noise_numeric(s, phi, Quadrature.PHI), abs=1e-8)
        assert noise_cab(a, 5.0, 1.0, t, Quadrature.V) == pytest.approx(
            noise_numeric(s, v, Quadrature.V), abs=1e-8)


def test_noise_flipped_state():
    phi, v = 0.9, -0.3
    got = noise_cab(label_to_alpha(phi, v), 6.0, 1.0, math.pi, Quadrature.PHI)
    assert got == pytest.approx(0.5 + 4 * phi ** 2, abs=1e-12)


def test_noise_broadcasts_over_labels():
    a = np.array([0.1, 1 + 1j, -0.5j])
    out = noise_cab(a, 5.0, 1.0, 1.3, Quadrature.V)
    assert out.shape == (3,)
    assert out[1] == pytest.approx(noise_cab(1 + 1j, 5.0, 1.0, 1.3, Quadrature.V))


# -- ensemble and time averages ----------------------------------------------------------

def test_ensemble_noise_endpoints():
    assert ensemble_noise(6.0, 1.0, 0.0) == 0.5
    assert ensemble_noise(6.0, 1.0, math.pi) == pytest.approx(2.5, abs=1e-12)
    assert ensemble_noise(6.0, 1.0, 2 * math.pi) == pytest.approx(0.5, abs=1e-12)


def test_ensemble_noise_monte_carlo(rng):
    # 0.01 is about 3 standard errors at 1e5 samples
    for t in rng.uniform(0, 2 * math.pi, 10):
        mc, _ = ensemble_noise_mc(6.0, 1.0, t, 100_000, rng, Quadrature.PHI)
        assert abs(mc - ensemble_noise(6.0, 1.0, t)) < 0.01


def test_ensemble_noise_same_for_both_quadratures(rng):
    t = 0.77
    m_phi, se_phi = ensemble_noise_mc(5.0, 1.0, t, 100_000, np.random.default_rng(1), Quadrature.PHI)
    m_v, se_v = ensemble_noise_mc(5.0, 1.0, t, 100_000, np.random.default_rng(2), Quadrature.V)
    assert abs(m_phi - m_v) < 4 * math.hypot(se_phi, se_v)


def test_time_average():
    assert time_avg_noise(100.0, 1.0) == pytest.approx(1.5, abs=2e-3)
    assert time_avg_noise(1000.0, 1.0) == pytest.approx(1.5, abs=2e-4)


def test_time_average_two_schemes():
    assert abs(time_avg_noise(100.0, 1.0) - time_avg_noise_riemann(100.0, 1.0)) < 1e-6
    assert abs(time_avg_noise(37.5, 1.0) - time_avg_noise_riemann(37.5, 1.0)) < 1e-6


def test_time_average_requires_fast_rotation():
    with pytest.raises(ValueError):
        time_avg_noise(5.0, 1.0)


@settings(max_examples=30, deadline=None)
@given(phi=st.floats(-3, 3), v=st.floats(-3, 3), t=st.floats(0, 7))
def test_variance_real_and_positive(phi, v, t):
    a = label_to_alpha(phi, v)
    for q in Quadrature:
        assert variance_closed_form(a, 5.0, 1.0, t, q) > 0

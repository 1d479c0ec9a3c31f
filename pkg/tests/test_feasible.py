"""Tap-and-detect subtraction: quadrature against sampling and limiting cases."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import poisson

from phaseconc.amplifier import thermal_subtracted_matrix
from phaseconc.errors import CutoffTooSmall, DegenerateNoise
from phaseconc.feasible import (
    QuadratureSpec,
    SubtractionSetup,
    feasible_statistics,
    feasible_subtract,
    povm_acceptance,
    success_probability,
)
from phaseconc.fock import displaced_thermal_state, mean_photon
from phaseconc.phase import PhaseKind, first_moment

# P_S at alpha = 0.2, n_th = 1, T = 0.9, eta = 0.4, M0 = 2 (48x48 Gauss-Hermite)
PS_FROZEN = 0.0015940870154672394


def _monte_carlo_success(alpha, n_th, T, eta, M0, samples, seed=1234):
    """Sample the noisy amplitude, split off the tap, count photons, thin by the detector efficiency."""
    rng = np.random.default_rng(seed)
    sd = math.sqrt(n_th / 2)
    gamma = alpha + rng.normal(0, sd, samples) + 1j * rng.normal(0, sd, samples)
    photons = rng.poisson((1 - T) * np.abs(gamma) ** 2)
    clicks = rng.binomial(photons, eta)
    return float(np.mean(clicks >= M0))


def test_success_probability_vs_sampling():
    setup = SubtractionSetup(0.9, 0.4, 2)
    ps = success_probability(0.2, 1.0, setup)
    assert math.isclose(ps, PS_FROZEN, rel_tol=1e-12)
    n = 1_000_000
    mc = _monte_carlo_success(0.2, 1.0, 0.9, 0.4, 2, n)
    sigma = math.sqrt(ps * (1 - ps) / n)
    assert abs(mc - ps) < 4 * sigma


def test_large_tap_vs_sampling():
    setup = SubtractionSetup(0.5, 0.8, 1)
    ps = success_probability(1.0, 0.5, setup)
    n = 400_000
    mc = _monte_carlo_success(1.0, 0.5, 0.5, 0.8, 1, n, seed=7)
    assert abs(mc - ps) < 4 * math.sqrt(ps * (1 - ps) / n)


def test_povm_acceptance():
    s = SubtractionSetup(0.9, 0.4, 3)
    lam = 0.4 * 0.1 * 4.0
    assert math.isclose(povm_acceptance(2.0, s), poisson.sf(2, lam), rel_tol=1e-12)
    s = SubtractionSetup(0.9, 0.4, 3, "pnr")
    assert math.isclose(povm_acceptance(2.0, s), poisson.pmf(3, lam), rel_tol=1e-12)
    assert povm_acceptance(0.0, SubtractionSetup(0.9, 0.4, 0)) == 1.0
    # tiny tails keep relative precision
    tiny = povm_acceptance(0.01, SubtractionSetup(0.9, 0.4, 6))
    lam = 0.04e-4
    assert math.isclose(tiny, lam**6 / 720 * math.exp(-lam) * (1 + lam / 7), rel_tol=1e-6)


def test_no_detection_is_displaced_thermal():
    out = feasible_subtract(0.2, 0.3, SubtractionSetup(0.9, 0.4, 0), 40)
    ref = displaced_thermal_state(math.sqrt(0.9) * 0.2, 0.9 * 0.3, 40)
    assert out.success_prob == pytest.approx(1.0, abs=1e-14)
    assert np.abs(out.state.elements - ref.elements).max() < 1e-14


def test_weak_tap_approaches_ideal_subtraction():
    T = 1 - 1e-6
    for M in (1, 3):
        out = feasible_subtract(0.2, 0.18, SubtractionSetup(T, 1.0, M), 60)
        ideal, _ = thermal_subtracted_matrix(math.sqrt(T) * 0.2, T * 0.18, M, 60)
        assert np.abs(out.state.elements - ideal.elements).max() < 1e-5


def test_node_doubling():
    s = SubtractionSetup(0.9, 0.4, 4)
    a = feasible_subtract(0.2, 0.19, s, 60, QuadratureSpec(48))
    b = feasible_subtract(0.2, 0.19, s, 60, QuadratureSpec(96))
    assert abs(a.success_prob / b.success_prob - 1) < 1e-10
    assert np.abs(a.state.elements - b.state.elements).max() < 1e-12


def test_statistics_match_matrix_route():
    for M in (0, 2, 5):
        s = SubtractionSetup(0.9, 0.4, M)
        cs = feasible_subtract(0.2, 0.19, s, 60)
        st_ = feasible_statistics(0.2, 0.19, s)
        assert abs(st_.mu_canonical - first_moment(cs.state, PhaseKind.CANONICAL)) < 1e-12
        assert abs(st_.mu_heterodyne - first_moment(cs.state, PhaseKind.HETERODYNE)) < 1e-12
        assert abs(st_.mean_photon - mean_photon(cs.state)) < 1e-11
        assert st_.success_prob == cs.success_prob


def test_success_decreases_with_threshold():
    ps = [success_probability(0.2, 0.19, SubtractionSetup(0.9, 0.4, M)) for M in range(7)]
    assert all(a > b for a, b in zip(ps, ps[1:]))
    assert math.isclose(ps[6], 4.81e-13, rel_tol=5e-3)


def test_impossible_event():
    out = feasible_subtract(0.0, 1e-6, SubtractionSetup(0.9, 0.1, 30), 20)
    assert out.impossible and out.success_prob < 1e-30


def test_errors():
    with pytest.raises(DegenerateNoise):
        feasible_subtract(0.2, 0.0, SubtractionSetup(0.9, 0.4, 1), 20)
    with pytest.raises(CutoffTooSmall):
        feasible_subtract(2.0, 1.0, SubtractionSetup(0.9, 0.4, 2), 10)
    for bad in [dict(T=0.0, eta=0.4, M0=1), dict(T=0.9, eta=1.5, M0=1), dict(T=0.9, eta=0.4, M0=-1),
                dict(T=0.9, eta=0.4, M0=1, detector="apd")]:
        with pytest.raises(ValueError):
            SubtractionSetup(**bad)


@settings(max_examples=20, deadline=None)
@given(alpha=st.floats(0.0, 1.0), n_th=st.floats(0.05, 1.0), M0=st.integers(0, 4), eta=st.floats(0.1, 1.0))
def test_conditional_state_is_physical(alpha, n_th, M0, eta):
    out = feasible_subtract(alpha, n_th, SubtractionSetup(0.9, eta, M0), 70)
    assert 0 < out.success_prob <= 1 + 1e-12
    rho = out.state
    assert rho.is_hermitian(1e-14)
    assert rho.min_eigenvalue() > -1e-12
    assert abs(rho.weight - 1) < 1e-8

"""Deterministic amplifier, add-then-subtract, and thermal-noise subtraction."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaseconc.amplifier import (
    add_then_subtract,
    addsub_mean_photon_m1,
    addsub_norm,
    addsub_variance_approx,
    displacement_matrix,
    gaussian_amp_mu,
    mu_addsub_closed,
    mu_thermal_subtracted,
    thermal_add,
    thermal_subtracted_matrix,
    thermal_subtracted_norm,
    thermal_subtracted_oracle,
    toy_perturbative_mu,
)
from phaseconc.errors import CutoffTooSmall, DegenerateNoise
from phaseconc.fock import coherent_state, displaced_thermal_state, mean_photon, suggest_dim
from phaseconc.phase import PhaseKind, coherent_variance, first_moment, holevo_variance

# canonical mu after a phase-insensitive amplifier at alpha = 0.2, computed as the first
# moment of the displaced thermal output in a truncated Fock basis
GAUSS_MU = {2.0: 0.188435741954, 4.0: 0.182822100991}
# a^M a^dagger^M on |0.2>, from the operator route at dim 60
ADDSUB_MU = {0: 0.1976827216547059, 1: 0.3726924682426264, 2: 0.5090535600141689}


@pytest.mark.parametrize("G", [1.5, 2.0, 4.0, 10.0])
@pytest.mark.parametrize("alpha", [0.2, 0.5, 1.0j])
def test_gaussian_amp_matches_output_state(alpha, G):
    g = math.sqrt(G)
    rho = displaced_thermal_state(g * alpha, G - 1, 400)
    assert abs(gaussian_amp_mu(alpha, G) - first_moment(rho)) < 1e-11


def test_gaussian_amp_frozen():
    for G, mu in GAUSS_MU.items():
        assert math.isclose(gaussian_amp_mu(0.2, G).real, mu, rel_tol=1e-10)


def test_gaussian_amp_rejects_no_gain():
    with pytest.raises(ValueError):
        gaussian_amp_mu(0.2, 1.0)
    assert gaussian_amp_mu(0.0, 2.0) == 0


def test_addsub_closed_vs_matrix():
    for M, mu in ADDSUB_MU.items():
        rho = add_then_subtract(0.2, M, 60)
        assert abs(first_moment(rho) - mu) < 1e-14
        assert abs(mu_addsub_closed(0.2, M) - mu) < 1e-14


def test_addsub_norm_vs_matrix():
    from phaseconc.fock import add_m, subtract_m

    for M in (1, 2, 3):
        raw = subtract_m(add_m(coherent_state(0.5, 60), M), M)
        assert math.isclose(raw.weight, addsub_norm(0.25, M), rel_tol=1e-12)


def test_addsub_m1_closed_forms():
    for N in (0.001, 0.04, 1.0):
        rho = add_then_subtract(math.sqrt(N), 1, 60)
        assert abs(mean_photon(rho) - addsub_mean_photon_m1(N)) < 1e-12
        assert math.isclose(addsub_norm(N, 1), 1 + 3 * N + N * N, rel_tol=1e-13)
    assert math.isclose(addsub_mean_photon_m1(0.04), 0.1498430813, rel_tol=1e-9)


def test_addsub_small_n_variance():
    N = 1e-4
    for M in (1, 2, 3):
        v = holevo_variance(mu_addsub_closed(math.sqrt(N), M))
        assert abs(v - addsub_variance_approx(N, M)) / v < 1e-3


def test_displacement_matrix_unitary_block():
    D = displacement_matrix(0.3 + 0.1j, 80)
    block = (D @ D.conj().T)[:40, :40]
    assert np.abs(block - np.eye(40)).max() < 1e-13
    # D(xi)|0> is the coherent state |xi>: compare with the Poisson amplitudes
    n = np.arange(80)
    ref = np.exp(-abs(0.3 + 0.1j) ** 2 / 2 + n * np.log(0.3 + 0.1j) - 0.5 * np.array([math.lgamma(k + 1) for k in n]))
    assert np.abs(D[:, 0] - ref).max() < 1e-14


def test_thermal_add_matches_closed_form():
    out = thermal_add(coherent_state(0.4, 40), 0.5)
    ref = displaced_thermal_state(0.4, 0.5, 40)
    assert np.abs(out.elements - ref.elements).max() < 1e-12


@pytest.mark.parametrize("alpha", [0.1, 0.2, 0.5])
@pytest.mark.parametrize("n_th", [0.1, 0.5, 1.0])
@pytest.mark.parametrize("M", [0, 1, 3])
def test_thermal_subtracted_vs_oracle(alpha, n_th, M):
    dim = suggest_dim(alpha**2, n_th, M)
    rho, norm = thermal_subtracted_matrix(alpha, n_th, M, dim)
    ora, w = thermal_subtracted_oracle(alpha, n_th, M, dim)
    assert np.abs(rho.elements - ora.elements[:dim, :dim]).max() < 1e-12
    assert math.isclose(norm, w, rel_tol=1e-10)
    assert abs(mu_thermal_subtracted(alpha, n_th, M) - first_moment(rho)) < 1e-12
    assert math.isclose(thermal_subtracted_norm(alpha, n_th, M) if M else 1.0, norm, rel_tol=1e-14)


def test_thermal_subtracted_cutoff():
    with pytest.raises(CutoffTooSmall):
        thermal_subtracted_matrix(0.5, 2.0, 4, 60)


def test_thermal_subtracted_degenerate():
    rho, norm = thermal_subtracted_matrix(0.2, 0.0, 3, 30)
    assert math.isclose(norm, 0.04**3)
    assert abs(first_moment(rho) - first_moment(coherent_state(0.2, 30))) < 1e-15
    with pytest.raises(DegenerateNoise):
        thermal_subtracted_matrix(0.2, -0.1, 1, 30)


def test_no_noise_no_gain():
    """Without thermal noise, subtraction leaves a coherent state unchanged."""
    assert math.isclose(holevo_variance(mu_thermal_subtracted(0.2, 1e-12, 2)), coherent_variance("canonical", 0.04),
                        rel_tol=1e-6)


def test_toy_model():
    mu = toy_perturbative_mu(1e-4, 1e-2)
    assert abs(mu.real / (2 * math.sqrt(1e-4)) - 1) < 0.015
    assert toy_perturbative_mu(0.0, 0.0) == 0


@settings(max_examples=25, deadline=None)
@given(alpha=st.floats(0.05, 1.0), n_th=st.floats(0.01, 1.0), M=st.integers(0, 4))
def test_subtracted_state_is_physical(alpha, n_th, M):
    dim = suggest_dim(alpha**2, n_th, M)
    rho, norm = thermal_subtracted_matrix(alpha, n_th, M, dim)
    assert norm > 0
    assert rho.is_hermitian(1e-13)
    assert rho.min_eigenvalue() > -1e-12
    assert abs(rho.weight - 1) < 1e-11
    vc = holevo_variance(first_moment(rho, PhaseKind.CANONICAL))
    vh = holevo_variance(first_moment(rho, PhaseKind.HETERODYNE))
    assert vh >= vc

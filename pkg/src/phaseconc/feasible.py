"""Measurement-induced photon subtraction with a beam-splitter tap and a threshold detector.

The noise-added input is the Gaussian mixture of coherent states

    Phi(gamma) = exp(-|gamma - alpha|^2 / n_th) / (pi n_th).

A beam splitter of transmissivity ``T`` sends ``|gamma>`` to
``|sqrt(T) gamma>`` (signal) and ``|sqrt(1-T) gamma>`` (tap); a detector of
efficiency ``eta`` sees ``|sqrt(eta (1-T)) gamma>``.  Conditioning on the
POVM element ``Pi`` gives

    rho_out = (1/P_S) int Phi(gamma) P_Pi(gamma) |sqrt(T) gamma><sqrt(T) gamma| d^2 gamma,
    P_S     = int Phi(gamma) P_Pi(gamma) d^2 gamma,

which is the tap-output form written with ``beta = sqrt(T) gamma``.  With no
conditioning (``M0 = 0``) the output is the displaced thermal state with
amplitude ``sqrt(T) alpha`` and ``T n_th`` noise photons.

Both integrals are evaluated with a Gauss-Hermite product rule centred on
``alpha`` with per-axis standard deviation ``sqrt(n_th / 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaln

from .errors import CutoffTooSmall, DegenerateNoise, QuadratureFailure
from .fock import FockDensityMatrix
from .phase import PhaseKind, coherent_mu_array

DEFAULT_NODES = 48
# P_S is a sum of non-negative terms, so it stays accurate far below the
# usual 1e-12 cut; only a vanishing rate is flagged.
MIN_SUCCESS = 1e-30
DOUBLING_RTOL = 1e-6


@dataclass(frozen=True)
class SubtractionSetup:
    """Tap transmissivity, detector efficiency and click threshold.

    ``detector="threshold"`` accepts events with at least ``M0`` photons;
    ``detector="pnr"`` accepts exactly ``M0`` photons.
    """

    T: float
    eta: float
    M0: int
    detector: str = "threshold"

    def __post_init__(self):
        if not 0 < self.T <= 1:
            raise ValueError(f"T must be in (0, 1], got {self.T}")
        if not 0 < self.eta <= 1:
            raise ValueError(f"eta must be in (0, 1], got {self.eta}")
        if int(self.M0) != self.M0 or self.M0 < 0:
            raise ValueError(f"M0 must be a non-negative integer, got {self.M0}")
        if self.detector not in ("threshold", "pnr"):
            raise ValueError(f"unknown detector {self.detector!r}")


@dataclass(frozen=True)
class QuadratureSpec:
    nodes: int = DEFAULT_NODES
    check_doubling: bool = True


@dataclass(frozen=True)
class ConditionalState:
    """Heralded output.  ``state`` is ``None`` when the event never happens."""

    state: FockDensityMatrix | None
    success_prob: float

    @property
    def impossible(self) -> bool:
        return self.state is None


def povm_acceptance(beta, setup: SubtractionSetup):
    """Probability that the tapped part of ``|beta>`` triggers the detector.

    The detector sees a coherent state with Poisson mean
    ``lam = eta (1-T) |beta|^2``; the threshold element accepts the upper tail
    ``1 - exp(-lam) sum_{k<M0} lam^k/k!``, evaluated as the regularized lower
    incomplete gamma function so small tails keep full relative precision.
    """
    lam = setup.eta * (1.0 - setup.T) * np.abs(np.asarray(beta, dtype=complex)) ** 2
    if setup.detector == "pnr":
        with np.errstate(divide="ignore"):
            logp = np.where(lam > 0, setup.M0 * np.log(lam), 0.0 if setup.M0 == 0 else -np.inf)
        out = np.exp(logp - lam - gammaln(setup.M0 + 1))
    elif setup.M0 == 0:
        out = np.ones_like(lam)
    else:
        out = gammainc(setup.M0, lam)
    return out if out.ndim else float(out)


def _nodes(alpha: complex, n_th: float, k: int):
    x, w = np.polynomial.hermite.hermgauss(k)
    sd = math.sqrt(n_th)
    gamma = complex(alpha) + sd * (x[:, None] + 1j * x[None, :])
    weights = np.outer(w, w) / math.pi
    return gamma.ravel(), weights.ravel()


def _coherent_amplitude_rows(beta: np.ndarray, dim: int) -> np.ndarray:
    """Row ``j`` holds the Fock amplitudes of ``|beta_j>``."""
    n = np.arange(dim)
    r = np.abs(beta)[:, None]
    with np.errstate(divide="ignore"):
        logmag = np.where(n == 0, 0.0, n * np.log(r)) - 0.5 * gammaln(n + 1) - 0.5 * r * r
    return np.exp(logmag) * np.exp(1j * n * np.angle(beta)[:, None])


def _check_inputs(n_th: float):
    if not n_th > 0:
        raise DegenerateNoise(f"added noise must be positive, got n_th={n_th}")


def _weights(alpha, n_th, setup, nodes):
    gamma, w = _nodes(alpha, n_th, nodes)
    return gamma, w * povm_acceptance(gamma, setup)


def success_probability(alpha: complex, n_th: float, setup: SubtractionSetup,
                        quad: QuadratureSpec = QuadratureSpec()) -> float:
    _check_inputs(n_th)
    _, wp = _weights(alpha, n_th, setup, quad.nodes)
    return math.fsum(wp)


def _checked_success(alpha, n_th, setup, quad) -> float:
    ps = success_probability(alpha, n_th, setup, quad)
    if quad.check_doubling and ps > MIN_SUCCESS:
        ps2 = success_probability(alpha, n_th, setup, QuadratureSpec(2 * quad.nodes, False))
        if abs(ps2 - ps) > DOUBLING_RTOL * ps:
            raise QuadratureFailure(
                f"P_S changes from {ps:.12g} to {ps2:.12g} when doubling {quad.nodes} nodes")
    return ps


def feasible_subtract(alpha: complex, n_th: float, setup: SubtractionSetup, dim: int,
                      quad: QuadratureSpec = QuadratureSpec()) -> ConditionalState:
    """Conditional output state and success probability of the tap-and-detect scheme."""
    _check_inputs(n_th)
    ps = _checked_success(alpha, n_th, setup, quad)
    if ps < MIN_SUCCESS:
        return ConditionalState(None, ps)
    gamma, wp = _weights(alpha, n_th, setup, quad.nodes)
    amps = _coherent_amplitude_rows(math.sqrt(setup.T) * gamma, dim)
    rho = (amps.T * (wp / ps)) @ amps.conj()
    state = FockDensityMatrix(0.5 * (rho + rho.conj().T))
    if abs(1.0 - state.weight) >= 1e-8:
        raise CutoffTooSmall(f"conditional state leaves weight {1 - state.weight:.3g} beyond dim={dim}")
    return ConditionalState(state, ps)


@dataclass(frozen=True)
class FeasibleStatistics:
    success_prob: float
    mu_canonical: complex
    mu_heterodyne: complex
    mean_photon: float


def feasible_statistics(alpha: complex, n_th: float, setup: SubtractionSetup,
                        quad: QuadratureSpec = QuadratureSpec()) -> FeasibleStatistics:
    """Phase moments and mean photon number of the conditional state, without a Fock cutoff.

    Each node contributes a coherent state ``|sqrt(T) gamma>`` whose moments are
    known in closed form, so no truncation enters.
    """
    _check_inputs(n_th)
    ps = _checked_success(alpha, n_th, setup, quad)
    if ps < MIN_SUCCESS:
        return FeasibleStatistics(ps, 0j, 0j, math.nan)
    gamma, wp = _weights(alpha, n_th, setup, quad.nodes)
    beta = math.sqrt(setup.T) * gamma
    p = wp / ps
    mu_c = complex(np.sum(p * coherent_mu_array(PhaseKind.CANONICAL, beta)))
    mu_h = complex(np.sum(p * coherent_mu_array(PhaseKind.HETERODYNE, beta)))
    nbar = float(np.sum(p * np.abs(beta) ** 2))
    return FeasibleStatistics(ps, mu_c, mu_h, nbar)

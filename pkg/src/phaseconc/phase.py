"""Phase measurements, first circular moments and Holevo phase variance.

A phase measurement is described by a real symmetric matrix ``H`` with
unit diagonal.  The outcome density is

    P(theta) = (1/2pi) sum_{m,n} exp(i theta (m - n)) H_mn rho_nm

and the quantity of interest is ``mu = <exp(i theta)>``, which only involves
the first subdiagonal: ``mu = sum_n H_{n,n+1} rho_{n+1,n}``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import NotNormalized
from .fock import FockDensityMatrix

SERIES_RTOL = 1e-16
SERIES_MAX_TERMS = 500
DEFAULT_THETA_POINTS = 2048


class PhaseKind(enum.Enum):
    CANONICAL = "canonical"
    HETERODYNE = "heterodyne"


@dataclass(frozen=True)
class PhaseMeasurementModel:
    kind: PhaseKind
    h: np.ndarray

    @property
    def dim(self) -> int:
        return self.h.shape[0]

    def subdiagonal(self) -> np.ndarray:
        """``H_{n,n+1}`` for ``n = 0..dim-2``."""
        return np.diagonal(self.h, 1)


@dataclass(frozen=True)
class PhaseStatistics:
    mu: complex
    variance: float

    @classmethod
    def from_mu(cls, mu: complex) -> PhaseStatistics:
        return cls(complex(mu), holevo_variance(mu))


def measurement_model(kind: PhaseKind | str, dim: int) -> PhaseMeasurementModel:
    kind = PhaseKind(kind)
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    if kind is PhaseKind.CANONICAL:
        h = np.ones((dim, dim))
    else:
        n = np.arange(dim)
        lf = gammaln(n + 1)
        h = np.exp(gammaln((n[:, None] + n[None, :]) / 2 + 1) - 0.5 * (lf[:, None] + lf[None, :]))
        np.fill_diagonal(h, 1.0)
    h.setflags(write=False)
    return PhaseMeasurementModel(kind, h)


def heterodyne_subdiagonal(n) -> np.ndarray:
    """``Gamma(n + 3/2) / sqrt(n! (n+1)!)``, the heterodyne ``H_{n,n+1}``."""
    n = np.asarray(n, dtype=float)
    return np.exp(gammaln(n + 1.5) - 0.5 * (gammaln(n + 1) + gammaln(n + 2)))


def _require_normalized(rho: FockDensityMatrix) -> None:
    if abs(rho.weight - 1.0) > 1e-9:
        raise NotNormalized(f"state has weight {rho.weight:.12g}; normalize first")


def first_moment(rho: FockDensityMatrix, model: PhaseMeasurementModel | PhaseKind | str = PhaseKind.CANONICAL) -> complex:
    """``mu = <exp(i theta)>`` for the given measurement."""
    _require_normalized(rho)
    sub = np.diagonal(rho.elements, -1)  # rho_{n+1,n}
    if isinstance(model, PhaseMeasurementModel):
        if model.dim < rho.dim:
            raise ValueError(f"model dim {model.dim} smaller than state dim {rho.dim}")
        h = model.subdiagonal()[: rho.dim - 1]
    elif PhaseKind(model) is PhaseKind.CANONICAL:
        h = 1.0
    else:
        h = heterodyne_subdiagonal(np.arange(rho.dim - 1))
    return complex(np.sum(h * sub))


def holevo_variance(mu: complex) -> float:
    a = abs(mu)
    if a == 0:
        return math.inf
    return 1.0 / (a * a) - 1.0


def phase_statistics(rho: FockDensityMatrix, kind: PhaseKind | str = PhaseKind.CANONICAL) -> PhaseStatistics:
    return PhaseStatistics.from_mu(first_moment(rho, kind))


def _sum_series(term, rtol=SERIES_RTOL, max_terms=SERIES_MAX_TERMS) -> float:
    """Sum ``term(n)`` (given as a ratio generator) until the running term is negligible."""
    total = 0.0
    for n, t in enumerate(term):
        total += t
        if t <= rtol * total or n + 1 >= max_terms:
            break
    return total


def _canonical_series(N: float):
    # N^n / (n! sqrt(n+1))
    t = 1.0
    n = 0
    while True:
        yield t / math.sqrt(n + 1)
        n += 1
        t *= N / n


def confluent_hypergeometric(a: float, b: float, x: float) -> float:
    """Kummer's ``1F1(a; b; x)`` by direct power series (``x >= 0`` moderate)."""

    def terms():
        t = 1.0
        n = 0
        while True:
            yield t
            t *= (a + n) / (b + n) * x / (n + 1)
            n += 1

    return _sum_series(terms())


def coherent_mu_closed(kind: PhaseKind | str, alpha: complex) -> complex:
    """First moment of a coherent state from its series representations.

    canonical:   exp(-N) alpha sum_n N^n / (n! sqrt(n+1))
    heterodyne:  exp(-N) alpha 1F1(3/2; 2; N) Gamma(3/2)/Gamma(2)
    """
    alpha = complex(alpha)
    N = abs(alpha) ** 2
    if N == 0:
        return 0j
    if PhaseKind(kind) is PhaseKind.CANONICAL:
        s = _sum_series(_canonical_series(N))
    else:
        s = confluent_hypergeometric(1.5, 2.0, N) * math.sqrt(math.pi) / 2
    return math.exp(-N) * alpha * s


def coherent_variance(kind: PhaseKind | str, N: float) -> float:
    return holevo_variance(coherent_mu_closed(kind, math.sqrt(N)))


def small_n_variance(kind: PhaseKind | str, N: float) -> float:
    """Leading small-N behaviour of the coherent-state phase variance."""
    if PhaseKind(kind) is PhaseKind.CANONICAL:
        return 1.0 / N + 1.0 - math.sqrt(2.0)
    return 4.0 / (math.pi * N) - 1.0 + 2.0 / math.pi


def coherent_mu_array(kind: PhaseKind | str, beta: np.ndarray) -> np.ndarray:
    """Vectorized :func:`coherent_mu_closed` over an array of amplitudes.

    Terms are built in log space so large ``|beta|`` (wide thermal mixtures)
    neither overflow nor lose the ``exp(-|beta|^2)`` prefactor.
    """
    beta = np.asarray(beta, dtype=complex)
    x = np.abs(beta) ** 2
    xmax = float(x.max(initial=0.0))
    n_terms = int(xmax + 12 * math.sqrt(xmax) + 40)
    n = np.arange(n_terms)[:, None]
    flat = x.ravel()[None, :]
    if PhaseKind(kind) is PhaseKind.CANONICAL:
        coef = -gammaln(n + 1) - 0.5 * np.log(n + 1)
    else:
        coef = gammaln(n + 1.5) - gammaln(n + 1) - gammaln(n + 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        logx = np.log(flat)
        logt = np.where(n == 0, 0.0, n * logx) - flat + coef
    s = np.exp(logt).sum(axis=0).reshape(x.shape)
    return beta * s


def phase_distribution(rho: FockDensityMatrix, model: PhaseMeasurementModel | PhaseKind | str = PhaseKind.CANONICAL,
                       theta=None):
    """Return ``(theta, P(theta))`` on the given grid (default: uniform on [-pi, pi))."""
    _require_normalized(rho)
    if theta is None:
        theta = -np.pi + 2 * np.pi * np.arange(DEFAULT_THETA_POINTS) / DEFAULT_THETA_POINTS
    theta = np.asarray(theta, dtype=float)
    if not isinstance(model, PhaseMeasurementModel):
        model = measurement_model(model, rho.dim)
    h = model.h[: rho.dim, : rho.dim]
    # c_k = sum_n H_{n+k,n} rho_{n,n+k};  P = (c_0 + 2 Re sum_k c_k e^{ik theta}) / 2pi
    p = np.full(theta.shape, float(np.sum(np.diagonal(h) * rho.populations)))
    for k in range(1, rho.dim):
        ck = np.sum(np.diagonal(h, -k) * np.diagonal(rho.elements, k))
        if ck != 0:
            p = p + 2.0 * np.real(ck * np.exp(1j * k * theta))
    return theta, p / (2 * np.pi)

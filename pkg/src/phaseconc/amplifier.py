"""Amplification channels acting on coherent inputs.

* deterministic phase-insensitive (Gaussian) amplifier, for contrast;
* ideal M-photon addition followed by M-photon subtraction;
* thermal-noise addition followed by ideal M-photon subtraction, both as a
  closed form and through the truncated-operator route;
* the weak-signal perturbative picture of noise + single subtraction.

The truncated-operator route is the reference: every closed-form series in
this module is tested against it.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate
from scipy.special import eval_genlaguerre, gammaln

from .errors import CutoffTooSmall, DegenerateNoise, QuadratureFailure
from .fock import (
    TAIL_TOL,
    FockDensityMatrix,
    add_m,
    coherent_state,
    displaced_thermal_elements,
    falling_factorial,
    log_scaled_laguerre_table,
    normalize,
    subtract_m,
)

DEGENERATE_NTH = 1e-10
_SERIES_MAX = 200_000


# -- deterministic Gaussian amplifier ---------------------------------------------------------


def gaussian_amp_mu(alpha: complex, G: float) -> complex:
    """Canonical ``mu`` after a phase-insensitive amplifier of linear gain ``G``.

    The output is a displaced thermal state (amplitude ``g alpha``, ``G - 1``
    noise photons), whose first moment is

        mu = (g alpha / sqrt(pi)) int_0^{1/G} exp(-x G N) / sqrt(-ln[(1-Gx)/(1-(G-1)x)]) dx.

    The integrand has a ``1/sqrt(x)`` endpoint singularity; substituting
    ``x = u**2`` leaves a bounded integrand on ``[0, 1/sqrt(G)]``.
    """
    if not G > 1:
        raise ValueError(f"gain G must be > 1, got {G}")
    alpha = complex(alpha)
    N = abs(alpha) ** 2
    if N == 0:
        return 0j

    def integrand(u):
        x = u * u
        if x == 0.0:
            return 2.0
        denom = -math.log1p(-G * x) + math.log1p(-(G - 1) * x)
        if not denom > 0 or math.isinf(denom):
            return 0.0
        return 2.0 * u * math.exp(-x * G * N) / math.sqrt(denom)

    val, err = integrate.quad(integrand, 0.0, 1.0 / math.sqrt(G), epsabs=0.0, epsrel=1e-10, limit=200)
    if err > 1e-6 * abs(val):
        raise QuadratureFailure(f"gain integral error estimate {err:.3g} for G={G}, N={N}")
    return math.sqrt(G) * alpha * val / math.sqrt(math.pi)


# -- ideal M-photon addition then subtraction -------------------------------------------------


def add_then_subtract(alpha: complex, M: int, dim: int) -> FockDensityMatrix:
    """Normalized ``a^M a^dagger^M |alpha><alpha| a^M a^dagger^M``."""
    rho = coherent_state(alpha, dim)
    return normalize(subtract_m(add_m(rho, M), M))


def addsub_norm(N: float, M: int) -> float:
    """``exp(-N) sum_n N^n/n! ((n+M)!/n!)^2``, the weight after adding and removing M photons."""

    def terms():
        n = 0
        t = math.exp(-N)
        while True:
            yield t * float(falling_factorial(n + M, M)) ** 2
            n += 1
            t *= N / n

    return _positive_series(terms())


def mu_addsub_closed(alpha: complex, M: int) -> complex:
    """Canonical ``mu`` after ``a^M a^dagger^M`` acting on ``|alpha>``.

        mu = exp(-N) alpha / norm * sum_n N^n / (n! sqrt(n+1)) * (n+M)!/n! * (n+1+M)!/(n+1)!

    The two rising-factorial blocks are the amplitudes ``(n+M)!/n!`` of
    neighbouring Fock components; for ``M = 1`` they reduce to ``(n+1)(n+2)``
    and the norm to ``1 + 3N + N^2``.
    """
    alpha = complex(alpha)
    N = abs(alpha) ** 2
    if N == 0:
        return 0j

    def terms():
        n = 0
        t = math.exp(-N)
        while True:
            yield t / math.sqrt(n + 1) * float(falling_factorial(n + M, M)) * float(falling_factorial(n + 1 + M, M))
            n += 1
            t *= N / n

    return alpha * _positive_series(terms()) / addsub_norm(N, M)


def addsub_mean_photon_m1(N: float) -> float:
    """Mean photon number of ``a a^dagger |alpha>`` (normalized)."""
    return N * (4 + 5 * N + N * N) / (1 + 3 * N + N * N)


def addsub_variance_approx(N: float, M: int) -> float:
    """Small-N canonical variance after adding and subtracting M photons."""
    return 1.0 / ((M + 1) ** 2 * N) + 1.0 - (M + 2) / (math.sqrt(2.0) * (M + 1))


# -- thermal noise addition ---------------------------------------------------------------------


def displacement_matrix(xi: complex, dim: int) -> np.ndarray:
    """Exact matrix elements ``<m|D(xi)|n>`` for ``m, n < dim``.

    For ``m >= n``: ``sqrt(n!/m!) xi^(m-n) exp(-|xi|^2/2) L_n^(m-n)(|xi|^2)``;
    the upper triangle follows from ``<m|D(xi)|n> = <n|D(-xi)|m>^*``.
    """
    xi = complex(xi)
    r2 = abs(xi) ** 2
    mm, nn = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    hi, lo = np.maximum(mm, nn), np.minimum(mm, nn)
    k = hi - lo
    # xi^k below the diagonal, (-xi*)^k above it
    z = np.where(mm >= nn, xi, -xi.conjugate())
    with np.errstate(divide="ignore"):
        logmag = 0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) - r2 / 2 + k * (0.5 * np.log(r2) if r2 > 0 else 0.0)
    if r2 == 0:
        logmag = np.where(k > 0, -np.inf, logmag)
    phase = np.exp(1j * k * np.angle(z))
    return np.exp(logmag) * phase * eval_genlaguerre(lo, k, r2)


def thermal_add(rho: FockDensityMatrix, n_th: float, nodes: int = 64) -> FockDensityMatrix:
    """Add thermal noise: average ``D(xi) rho D(xi)^dagger`` over a Gaussian of mean ``|xi|^2 = n_th``.

    Uses a Gauss-Hermite product rule over ``Re xi, Im xi`` (per-axis
    variance ``n_th/2``).  Elements are exact for the truncated input.
    """
    if abs(rho.weight - 1) > 1e-9:
        raise ValueError("thermal_add expects a normalized state")
    if n_th < 0:
        raise DegenerateNoise(f"n_th must be >= 0, got {n_th}")
    if n_th == 0:
        return rho
    x, w = np.polynomial.hermite.hermgauss(nodes)
    sd = math.sqrt(n_th)
    out = np.zeros((rho.dim, rho.dim), dtype=complex)
    for i in range(nodes):
        for j in range(nodes):
            d = displacement_matrix(sd * complex(x[i], x[j]), rho.dim)
            out += (w[i] * w[j] / math.pi) * (d @ rho.elements @ d.conj().T)
    result = FockDensityMatrix(out)
    if abs(1.0 - result.weight) >= 1e-8:
        raise CutoffTooSmall(f"noise pushes weight {1 - result.weight:.3g} beyond dim={rho.dim}")
    return result


# -- thermal noise addition followed by ideal subtraction ----------------------------------------


def _positive_series(terms, rtol=1e-17, min_terms=5) -> float:
    """Sum a series of non-negative terms with a unimodal profile until the tail is negligible."""
    vals = []
    total = 0.0
    prev = -1.0
    for n, t in enumerate(terms):
        vals.append(t)
        total += t
        if n >= min_terms and t <= prev and t <= rtol * total:
            break
        prev = t
        if n > _SERIES_MAX:
            raise CutoffTooSmall("series failed to converge")
    return math.fsum(vals)


def _thermal_series_parts(alpha: complex, n_th: float, M: int):
    """Yield ``(diag_term, sub_term)`` for the noise-added, subtracted series in ``k = 0, 1, ...``.

    ``diag_term`` is ``rho0_{k+M,k+M} (k+M)!/k!`` and ``sub_term`` the
    magnitude of ``rho0_{k+M+1,k+M} sqrt((k+M)!(k+M+1)!/(k!(k+1)!))``, with
    ``rho0`` the displaced thermal state.  Generated in chunks.
    """
    r2 = abs(complex(alpha)) ** 2
    s = 1.0 + n_th
    q, w = n_th / s, r2 / (s * s)
    chunk = 256
    start = 0
    while True:
        top = M + start + chunk + 1
        table = log_scaled_laguerre_table(top, [0, 1], q, w)
        n = np.arange(M + start, M + start + chunk)
        diag = np.exp(table[n, 0] - r2 / s - math.log(s)) * falling_factorial(n, M)
        sub = np.exp(table[n, 1] - r2 / s - 2 * math.log(s) - 0.5 * np.log(n + 1.0)) * np.sqrt(
            falling_factorial(n, M) * falling_factorial(n + 1, M))
        for d, u in zip(diag, sub):
            yield float(d), float(u)
        start += chunk


def thermal_subtracted_norm(alpha: complex, n_th: float, M: int) -> float:
    """Normalization ``Tr(a^M rho a^dagger^M)`` of the noise-added, M-subtracted state."""
    if n_th < DEGENERATE_NTH and M >= 1:
        return abs(complex(alpha)) ** (2 * M)
    return _positive_series(d for d, _ in _thermal_series_parts(alpha, n_th, M))


def mu_thermal_subtracted(alpha: complex, n_th: float, M: int) -> complex:
    """Canonical ``mu`` of the noise-added, M-subtracted state from its series form.

        mu = (1/norm) sum_k sqrt((k+M)!/(k+M+1)!) exp(-|a|^2/(n_th+1)) a n_th^(k+M) / (n_th+1)^(k+M+2)
             L_{k+M}^1(-|a|^2/(n_th(n_th+1))) sqrt((k+M)!(k+1+M)!/(k!(k+1)!))

    Independent of any Fock cutoff.
    """
    alpha = complex(alpha)
    N = abs(alpha) ** 2
    if N == 0:
        return 0j
    if n_th < DEGENERATE_NTH and M >= 1:
        return coherent_mu_from_series(alpha)
    norm = thermal_subtracted_norm(alpha, n_th, M)
    s = _positive_series(u for _, u in _thermal_series_parts(alpha, n_th, M))
    return alpha * s / norm


def coherent_mu_from_series(alpha: complex) -> complex:
    from .phase import PhaseKind, coherent_mu_closed

    return coherent_mu_closed(PhaseKind.CANONICAL, alpha)


def thermal_subtracted_matrix(alpha: complex, n_th: float, M: int, dim: int):
    """Normalized noise-added, M-subtracted state and its normalization factor.

    Returns ``(rho, norm)``.  The output element ``<j|rho|l>`` is the
    displaced-thermal element ``<j+M|rho0|l+M>`` times
    ``sqrt((j+M)!/j! (l+M)!/l!)``, divided by ``norm``.  For ``n_th`` below
    ``1e-10`` the input is treated as exactly coherent (an eigenstate of
    ``a``), so the output is the coherent state and ``norm = |alpha|^(2M)``.
    """
    if n_th < 0:
        raise DegenerateNoise(f"n_th must be >= 0, got {n_th}")
    if n_th < DEGENERATE_NTH and M >= 1:
        return coherent_state(alpha, dim), abs(complex(alpha)) ** (2 * M)
    block = displaced_thermal_elements(alpha, n_th, dim, offset=M)
    ff = np.sqrt(falling_factorial(np.arange(M, M + dim), M))
    norm = thermal_subtracted_norm(alpha, n_th, M) if M else 1.0
    rho = FockDensityMatrix(block * ff[:, None] * ff[None, :] / norm)
    tail = 1.0 - rho.weight
    if tail >= TAIL_TOL:
        raise CutoffTooSmall(f"subtracted state leaves tail {tail:.3g} beyond dim={dim}")
    return rho, norm


def thermal_subtracted_oracle(alpha: complex, n_th: float, M: int, dim: int):
    """Brute-force route: truncated displaced thermal state, then ``M`` ladder applications.

    Returns ``(normalized state, weight)`` on ``dim + M`` levels.
    """
    from .fock import displaced_thermal_state

    raw = subtract_m(displaced_thermal_state(alpha, n_th, dim + M), M)
    return normalize(raw), raw.weight


# -- perturbative picture ---------------------------------------------------------------------------


def toy_perturbative_mu(N: float, eps: float) -> complex:
    """``mu = 2 eps alpha / (N + eps + 4 N eps)`` for a weak coherent state with weak noise, one subtraction."""
    if N < 0 or eps < 0:
        raise ValueError("N and eps must be non-negative")
    norm = N + eps + 4 * N * eps
    if norm == 0:
        return 0j
    return complex(2 * eps * math.sqrt(N) / norm)

"""Truncated Fock-basis density matrices and ladder-operator primitives.

States live on the photon-number basis ``|0>, ..., |dim-1>``.  Conditional
operations (photon subtraction/addition) are not trace preserving, so a
:class:`FockDensityMatrix` may be unnormalized; its ``weight`` is the trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .errors import CutoffTooSmall, TruncationOverflow

TAIL_TOL = 1e-12


@dataclass(frozen=True)
class CoherentParams:
    alpha: complex

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))

    @property
    def N(self) -> float:
        return abs(self.alpha) ** 2


@dataclass(frozen=True)
class ThermalParams:
    n_th: float

    def __post_init__(self):
        if not self.n_th >= 0:
            raise ValueError(f"n_th must be >= 0, got {self.n_th}")


@dataclass(frozen=True)
class FockDensityMatrix:
    """Density matrix on a truncated Fock basis.

    ``elements[n, m]`` is ``<n|rho|m>``.  The array is made read-only on
    construction; ``weight`` is always the (real) trace.
    """

    elements: np.ndarray
    weight: float = field(init=False)

    def __post_init__(self):
        arr = np.array(self.elements, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "elements", arr)
        object.__setattr__(self, "weight", float(np.trace(arr).real))

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    @property
    def populations(self) -> np.ndarray:
        return self.elements.diagonal().real

    def __getitem__(self, idx):
        return self.elements[idx]

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.elements - self.elements.conj().T), initial=0.0) <= tol)

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.elements + self.elements.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    def rotated(self, phi: float) -> FockDensityMatrix:
        """Phase-space rotation ``exp(i phi n) rho exp(-i phi n)``."""
        n = np.arange(self.dim)
        phase = np.exp(1j * phi * (n[:, None] - n[None, :]))
        return FockDensityMatrix(self.elements * phase)


def _check_dim(dim: int) -> None:
    if int(dim) != dim or dim < 2:
        raise ValueError(f"dim must be an integer >= 2, got {dim}")


def falling_factorial(n, m: int):
    """``n!/(n-m)!`` evaluated as the product ``n (n-1) ... (n-m+1)``.

    ``n`` may be an integer array; entries with ``n < m`` give 0.
    """
    n = np.asarray(n, dtype=float)
    out = np.ones_like(n)
    for j in range(m):
        out = out * np.maximum(n - j, 0.0)
    return out


def laguerre_assoc(n: int, k: int, x):
    """Associated Laguerre polynomial ``L_n^k(x)`` by upward recurrence in ``n``.

    ``x`` may be a scalar or an array.  Requires ``n >= 0`` and ``k >= -n``.
    """
    if n < 0 or k < -n:
        raise ValueError(f"need n >= 0 and k >= -n, got n={n}, k={k}")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + k - x
    for j in range(1, n):
        prev, cur = cur, ((2 * j + 1 + k - x) * cur - (j + k) * prev) / (j + 1)
    return cur if cur.ndim else float(cur)


def log_scaled_laguerre_table(n_max: int, k, q: float, w: float) -> np.ndarray:
    """Table of ``log(q**n * L_n^k(-w/q))`` for ``n = 0..n_max`` (rows) and each ``k``.

    This is the combination appearing in displaced thermal states with
    ``q = n_th/(n_th+1)`` and ``w = |alpha|^2/(n_th+1)^2``.  Writing the
    recurrence directly for the scaled quantity keeps it finite as
    ``n_th -> 0`` (``q -> 0`` with ``w`` fixed), where it reduces to
    ``w**n / n!``.  For ``k >= 0`` every entry is positive, so the recurrence
    only adds positive terms apart from the small ``q**2`` correction; values
    are rescaled on the fly and returned as logarithms to avoid overflow.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    out = np.empty((n_max + 1, k.size))
    logscale = np.zeros(k.size)
    prev = np.zeros(k.size)
    cur = np.ones(k.size)
    with np.errstate(divide="ignore"):
        out[0] = 0.0
        for n in range(n_max):
            nxt = ((q * (2 * n + 1 + k) + w) * cur - q * q * (n + k) * prev) / (n + 1)
            prev, cur = cur, nxt
            big = np.abs(cur) > 1e150
            if big.any():
                f = np.where(big, np.abs(cur), 1.0)
                prev, cur = prev / f, cur / f
                logscale = logscale + np.log(f)
            out[n + 1] = np.log(cur) + logscale
    return out


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """Fock amplitudes ``exp(-|alpha|^2/2) alpha^n / sqrt(n!)`` for ``n < dim``."""
    alpha = complex(alpha)
    n = np.arange(dim)
    if alpha == 0:
        amp = np.zeros(dim, dtype=complex)
        amp[0] = 1.0
        return amp
    r, phi = abs(alpha), np.angle(alpha)
    mag = np.exp(n * np.log(r) - 0.5 * gammaln(n + 1) - 0.5 * r * r)
    return mag * np.exp(1j * n * phi)


def coherent_state(alpha: complex, dim: int) -> FockDensityMatrix:
    """Pure coherent state ``|alpha><alpha|`` truncated to ``dim`` levels."""
    _check_dim(dim)
    N = abs(complex(alpha)) ** 2
    tail = poisson.sf(dim - 1, N) if N > 0 else 0.0
    if tail >= TAIL_TOL:
        raise CutoffTooSmall(f"coherent state with N={N:g} leaves tail {tail:.3g} beyond dim={dim}")
    amp = coherent_amplitudes(alpha, dim)
    return FockDensityMatrix(np.outer(amp, amp.conj()))


def displaced_thermal_elements(alpha: complex, n_th: float, dim: int, offset: int = 0) -> np.ndarray:
    """Block ``<n|rho|m>`` of a displaced thermal state for ``n, m`` in ``[offset, offset+dim)``.

    Closed form (``m >= n``, ``k = m - n``)::

        rho_nm = sqrt(n!/m!) exp(-|a|^2/(n_th+1)) (a*)^k n_th^n / (n_th+1)^(m+1)
                 * L_n^k(-|a|^2 / (n_th (n_th+1)))

    evaluated through :func:`log_scaled_laguerre_table` so that ``n_th = 0``
    (a pure coherent state) is handled without special casing.
    """
    if n_th < 0:
        raise ValueError(f"n_th must be >= 0, got {n_th}")
    alpha = complex(alpha)
    r2 = abs(alpha) ** 2
    s = 1.0 + n_th
    q = n_th / s
    w = r2 / (s * s)
    top = offset + dim - 1
    ks = np.arange(dim)
    log_lag = log_scaled_laguerre_table(top, ks, q, w)  # log_lag[n, k]

    n = np.arange(offset, offset + dim)
    m = n[None, :]
    nn = n[:, None]
    k = m - nn
    upper = k >= 0
    kk = np.where(upper, k, 0)
    # magnitude prefactor sqrt(n!/m!) (|a|/s)^k exp(-|a|^2/s) / s, in log space
    log_pref = 0.5 * (gammaln(nn + 1) - gammaln(m + 1)) - r2 / s - np.log(s)
    if r2 > 0:
        log_pref = log_pref + kk * (0.5 * np.log(r2) - np.log(s))
        phase = np.exp(-1j * kk * np.angle(alpha))
    else:
        log_pref = np.where(kk > 0, -np.inf, log_pref)
        phase = np.ones_like(log_pref, dtype=complex)
    log_val = np.where(upper, log_pref + log_lag[nn, kk], -np.inf)
    out = np.exp(log_val) * phase
    out = out + np.triu(out, 1).conj().T
    return out


def displaced_thermal_populations(alpha: complex, n_th: float, n_max: int) -> np.ndarray:
    """Photon-number distribution ``<n|rho|n>``, ``n = 0..n_max``, of a displaced thermal state."""
    r2 = abs(complex(alpha)) ** 2
    s = 1.0 + n_th
    log_lag = log_scaled_laguerre_table(n_max, 0, n_th / s, r2 / (s * s))[:, 0]
    return np.exp(log_lag - r2 / s - np.log(s))


def displaced_thermal_state(alpha: complex, n_th: float, dim: int) -> FockDensityMatrix:
    """Coherent state ``|alpha>`` with added thermal noise of mean ``n_th`` photons."""
    _check_dim(dim)
    rho = FockDensityMatrix(displaced_thermal_elements(alpha, n_th, dim))
    tail = 1.0 - rho.weight
    if tail >= TAIL_TOL:
        raise CutoffTooSmall(
            f"displaced thermal state (N={abs(alpha)**2:g}, n_th={n_th:g}) leaves tail {tail:.3g} beyond dim={dim}"
        )
    return rho


def _lowering(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


def annihilate(rho: FockDensityMatrix) -> FockDensityMatrix:
    """Unnormalized photon subtraction ``a rho a^dagger``."""
    a = _lowering(rho.dim)
    return FockDensityMatrix(a @ rho.elements @ a.T)


def create(rho: FockDensityMatrix) -> FockDensityMatrix:
    """Unnormalized photon addition ``a^dagger rho a``.

    Raises :class:`TruncationOverflow` if the top level is populated, since
    the addition would push that population past the cutoff.
    """
    top = rho.elements[-1, -1].real
    if abs(top) >= 1e-10 * max(rho.weight, 1e-300):
        raise TruncationOverflow(f"population {top:.3g} in top level {rho.dim - 1}; increase dim")
    a = _lowering(rho.dim)
    return FockDensityMatrix(a.T @ rho.elements @ a)


def subtract_m(rho: FockDensityMatrix, M: int) -> FockDensityMatrix:
    for _ in range(M):
        rho = annihilate(rho)
    return rho


def add_m(rho: FockDensityMatrix, M: int) -> FockDensityMatrix:
    for _ in range(M):
        rho = create(rho)
    return rho


def trace(rho: FockDensityMatrix) -> float:
    return rho.weight


def normalize(rho: FockDensityMatrix) -> FockDensityMatrix:
    if rho.weight < 1e-300:
        raise ValueError(f"cannot normalize a state of weight {rho.weight:.3g}")
    return FockDensityMatrix(rho.elements / rho.weight)


def mean_photon(rho: FockDensityMatrix) -> float:
    """Expectation ``Tr(rho n) / Tr(rho)``; unnormalized input is allowed."""
    if rho.weight <= 0:
        raise ValueError("mean photon number undefined for zero-weight state")
    return float(np.dot(np.arange(rho.dim), rho.populations) / rho.weight)


def suggest_dim(N: float, n_th: float = 0.0, M: int = 0, tol: float = TAIL_TOL) -> int:
    """Smallest cutoff keeping the neglected tail of an M-subtracted displaced thermal state below ``tol``.

    The photon-number distribution of the displaced thermal input is
    tabulated far past its bulk, weighted by ``n!/(n-M)!`` (the effect of
    ``M`` subtractions) and cut where the remaining relative mass drops
    below ``tol``.  The returned size refers to the state after subtraction;
    a brute-force route acting on the input needs ``dim + M`` levels.
    """
    alpha = np.sqrt(max(N, 0.0))
    n_max = int(40 + 4 * M + 3 * (N + n_th) + 60 * np.sqrt(N + n_th + 1) + 40 * n_th)
    while True:
        pops = displaced_thermal_populations(alpha, n_th, n_max)
        weighted = pops * falling_factorial(np.arange(n_max + 1), M)
        total = weighted.sum()
        if total <= 0:
            return max(2, M + 2)
        if weighted[-1] / total < tol * 1e-6:
            break
        n_max *= 2
    tail = np.cumsum(weighted[::-1])[::-1] / total  # tail[n] = mass at index >= n
    first = int(np.argmax(tail < tol))
    return max(2, first - M + 1)

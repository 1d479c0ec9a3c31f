"""Choice of added thermal noise and the per-M sweep behind the amplifier reports.

For each subtraction order the mean thermal photon number ``n_th`` is chosen
to minimize the canonical phase variance: a 25-point log-spaced scan over
``nth_bounds`` locates the basin, golden-section search refines it.  The
objective uses cutoff-free evaluations (series for ideal subtraction, the
coherent-state mixture for the tap-and-detect scheme); the reported numbers
come from the Fock-matrix route at the configured cutoff.
"""

from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from .amplifier import mu_thermal_subtracted, thermal_subtracted_matrix
from .errors import InfiniteVariance, ObjectiveFailure, PhaseConcError
from .feasible import QuadratureSpec, SubtractionSetup, feasible_statistics, feasible_subtract
from .fock import displaced_thermal_state, mean_photon
from .phase import PhaseKind, coherent_variance, first_moment, holevo_variance

log = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5) - 1) / 2
COARSE_POINTS = 25
NTH_TOL = 1e-6
# relative slack when comparing bracket ends: the objective is flat to rounding near the optimum
FLAT_RTOL = 1e-12


class SweepMode(enum.Enum):
    IDEAL = "ideal"
    FEASIBLE = "feasible"


@dataclass(frozen=True)
class SweepConfig:
    input_N: float
    mode: SweepMode = SweepMode.IDEAL
    M_range: tuple = (0, 1, 2, 3, 4, 5, 6)
    T: float = 0.9
    eta: float = 0.4
    detector: str = "threshold"
    nth_bounds: tuple = (1e-3, 20.0)
    dim: int = 60
    quad_nodes: int = 48

    def __post_init__(self):
        object.__setattr__(self, "mode", SweepMode(self.mode))
        object.__setattr__(self, "M_range", tuple(int(m) for m in self.M_range))
        object.__setattr__(self, "nth_bounds", tuple(float(b) for b in self.nth_bounds))
        if not self.M_range or min(self.M_range) < 0:
            raise ValueError("M_range must be a non-empty list of non-negative integers")
        lo, hi = self.nth_bounds
        if not (1e-4 < lo < hi <= 50):
            raise ValueError(f"nth_bounds must satisfy 1e-4 < lo < hi <= 50, got {self.nth_bounds}")
        if self.input_N < 0:
            raise ValueError("input_N must be >= 0")

    @property
    def alpha(self) -> float:
        return math.sqrt(self.input_N)

    def setup(self, M: int) -> SubtractionSetup:
        return SubtractionSetup(self.T, self.eta, M, self.detector)


@dataclass(frozen=True)
class NthOptimum:
    nth: float
    v_min: float
    at_boundary: bool = False
    local_min: bool = True


@dataclass(frozen=True)
class AmplifierReport:
    M: int
    nth_opt: float
    v_canonical: float
    v_heterodyne: float
    mean_photon_out: float
    mean_photon_pre_subtraction: float
    success_prob: float
    effective_gain: float
    equivalent_coherent_N: float
    flags: tuple = field(default_factory=tuple)


def golden_section(f, a: float, b: float, tol: float = NTH_TOL):
    """Golden-section search for a minimum of ``f`` on ``[a, b]``.

    Returns ``(x, fx, (a, fa), (b, fb))`` where ``x`` is the best point seen
    and ``a, b`` the final bracket.
    """
    fa, fb = f(a), f(b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, fb = d, fd
            d, fd = c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, fa = c, fc
            c, fc = d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x, fx = min(((c, fc), (d, fd), (a, fa), (b, fb)), key=lambda p: p[1])
    return x, fx, (a, fa), (b, fb)


def variance_objective(cfg: SweepConfig, M: int, n_th: float) -> float:
    """Canonical phase variance after noise ``n_th`` and subtraction order ``M``."""
    try:
        if cfg.mode is SweepMode.IDEAL:
            mu = mu_thermal_subtracted(cfg.alpha, n_th, M)
        else:
            stats = feasible_statistics(cfg.alpha, n_th, cfg.setup(M), QuadratureSpec(cfg.quad_nodes, False))
            mu = stats.mu_canonical
    except PhaseConcError as exc:
        raise ObjectiveFailure(f"objective failed at M={M}, n_th={n_th:g}: {exc}") from exc
    return holevo_variance(mu)


def _round12(x: float) -> float:
    return float(f"{x:.12g}")


def optimize_nth(cfg: SweepConfig, M: int) -> NthOptimum:
    """Noise level minimizing the canonical variance for subtraction order ``M``."""
    if cfg.input_N == 0:
        raise InfiniteVariance("input N = 0: mu vanishes for every noise level")
    lo, hi = cfg.nth_bounds
    grid = np.geomspace(lo, hi, COARSE_POINTS)
    vals = np.array([variance_objective(cfg, M, x) for x in grid])
    if not np.isfinite(vals).any():
        raise InfiniteVariance(f"phase variance infinite over the whole n_th range for M={M}")
    i = int(np.argmin(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, COARSE_POINTS - 1)]
    x, fx, (a, fa), (b, fb) = golden_section(lambda t: variance_objective(cfg, M, t), a, b)
    at_boundary = (i == 0 and x - lo <= NTH_TOL) or (i == COARSE_POINTS - 1 and hi - x <= NTH_TOL)
    if at_boundary:
        x = lo if i == 0 else hi
    nth = _round12(x)
    v = variance_objective(cfg, M, nth)
    slack = FLAT_RTOL * abs(v)
    local_min = at_boundary or (fa >= v - slack and fb >= v - slack)
    if not local_min:
        log.warning("n_th optimum for M=%d is not bracketed (fa=%g, f=%g, fb=%g)", M, fa, v, fb)
    return NthOptimum(nth, v, at_boundary, local_min)


def equivalent_coherent_N(v: float) -> float:
    """Mean photon number of the coherent state with canonical phase variance ``v``."""
    if not math.isfinite(v):
        raise InfiniteVariance("no coherent state has infinite phase variance")
    if v <= 0:
        raise ValueError(f"phase variance must be positive, got {v}")
    lo, hi = 1e-12, 1.0
    while coherent_variance(PhaseKind.CANONICAL, hi) > v:
        hi *= 2
        if hi > 1e4:
            raise ValueError(f"variance {v} below the reachable coherent range")
    return bisect(lambda N: coherent_variance(PhaseKind.CANONICAL, N) - v, lo, hi, xtol=1e-15, rtol=1e-13)


def evaluate_state(cfg: SweepConfig, M: int, n_th: float):
    """Fock-matrix route: ``(state or None, success, mean photon before subtraction)``."""
    pre = mean_photon(displaced_thermal_state(cfg.alpha, n_th, cfg.dim))
    if cfg.mode is SweepMode.IDEAL:
        rho, norm = thermal_subtracted_matrix(cfg.alpha, n_th, M, cfg.dim)
        return rho, norm, pre
    cs = feasible_subtract(cfg.alpha, n_th, cfg.setup(M), cfg.dim, QuadratureSpec(cfg.quad_nodes))
    return cs.state, cs.success_prob, pre


def report_for(cfg: SweepConfig, M: int, n_th: float, flags=()) -> AmplifierReport:
    rho, success, pre = evaluate_state(cfg, M, n_th)
    if rho is None:
        return AmplifierReport(M, n_th, math.inf, math.inf, math.nan, pre, success, math.nan, math.nan,
                               tuple(flags) + ("no-success",))
    vc = holevo_variance(first_moment(rho, PhaseKind.CANONICAL))
    vh = holevo_variance(first_moment(rho, PhaseKind.HETERODYNE))
    nout = mean_photon(rho)
    return AmplifierReport(
        M=M,
        nth_opt=n_th,
        v_canonical=vc,
        v_heterodyne=vh,
        mean_photon_out=nout,
        mean_photon_pre_subtraction=pre,
        success_prob=success,
        effective_gain=nout / cfg.input_N,
        equivalent_coherent_N=equivalent_coherent_N(vc),
        flags=tuple(flags),
    )


def sweep_point(cfg: SweepConfig, M: int) -> AmplifierReport:
    opt = optimize_nth(cfg, M)
    flags = []
    if opt.at_boundary:
        flags.append("nth-at-bound")
    if not opt.local_min:
        flags.append("not-bracketed")
    return report_for(cfg, M, opt.nth, flags)


def run_sweep(cfg: SweepConfig, threads: int = 1) -> list[AmplifierReport]:
    """One report per ``M`` in ``cfg.M_range``, in that order."""
    if threads <= 1:
        return [sweep_point(cfg, M) for M in cfg.M_range]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda M: sweep_point(cfg, M), cfg.M_range))

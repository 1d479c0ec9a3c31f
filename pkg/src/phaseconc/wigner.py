"""Wigner functions on a phase-space grid and their half-maximum contours.

Quadratures follow ``x = (a + a^dagger)/sqrt(2)``, so a coherent state
``|alpha>`` is centred at ``(sqrt(2) Re alpha, sqrt(2) Im alpha)`` and the
vacuum is ``exp(-x^2 - p^2)/pi``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from matplotlib.path import Path as _MplPath
from scipy.special import gammaln
from skimage import measure

from .errors import CutoffTooSmall, NoClosedContour, NotNormalized
from .fock import FockDensityMatrix

# levels whose population is below this are dropped before summing the kernel
_TRIM = 1e-20


@dataclass(frozen=True)
class GridSpec:
    """Square grid ``[xmin, xmax]^2``; the default step is 0.04.

    The extent of 6 keeps the mass outside the grid below 1e-8 for the
    amplified states here (a 4-unit box loses ~1e-3 for six subtractions).
    """

    xmin: float = -6.0
    xmax: float = 6.0
    points: int = 301

    def axis(self) -> np.ndarray:
        return np.linspace(self.xmin, self.xmax, self.points)


@dataclass(frozen=True)
class WignerGrid:
    x_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray  # values[i, j] = W(x_axis[j], p_axis[i])

    def integral(self) -> float:
        inner = np.trapezoid(self.values, self.x_axis, axis=1)
        return float(np.trapezoid(inner, self.p_axis))

    def max_location(self):
        i, j = np.unravel_index(np.argmax(self.values), self.values.shape)
        return self.x_axis[j], self.p_axis[i]

    def to_csv(self, path, header_comment: str | None = None) -> None:
        """Write ``x, p, W`` triples (12 significant digits)."""
        with open(path, "w", newline="") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["x", "p", "W"])
            for i, p in enumerate(self.p_axis):
                for j, x in enumerate(self.x_axis):
                    writer.writerow([f"{x:.12g}", f"{p:.12g}", f"{self.values[i, j]:.12g}"])


@dataclass(frozen=True)
class ContourPolyline:
    points: np.ndarray  # (K, 2) array of (x, p)
    closed: bool

    def area(self) -> float:
        x, p = self.points[:, 0], self.points[:, 1]
        return 0.5 * abs(float(np.dot(x, np.roll(p, -1)) - np.dot(p, np.roll(x, -1))))

    def perimeter(self) -> float:
        seg = np.diff(self.points, axis=0)
        length = float(np.hypot(seg[:, 0], seg[:, 1]).sum())
        if self.closed and not np.allclose(self.points[0], self.points[-1]):
            length += float(np.hypot(*(self.points[0] - self.points[-1])))
        return length

    def centroid(self):
        x, p = self.points[:, 0], self.points[:, 1]
        xn, pn = np.roll(x, -1), np.roll(p, -1)
        cross = x * pn - xn * p
        a = 0.5 * cross.sum()
        if a == 0:
            return float(x.mean()), float(p.mean())
        return float(((x + xn) * cross).sum() / (6 * a)), float(((p + pn) * cross).sum() / (6 * a))

    def mean_radius(self, center=None) -> float:
        cx, cp = self.centroid() if center is None else center
        return float(np.hypot(self.points[:, 0] - cx, self.points[:, 1] - cp).mean())


def _effective_dim(rho: FockDensityMatrix) -> int:
    pops = rho.populations
    keep = np.nonzero(pops > _TRIM * rho.weight)[0]
    return int(keep[-1]) + 1 if keep.size else 1


def wigner_of(rho: FockDensityMatrix, grid: GridSpec = GridSpec()) -> WignerGrid:
    """Wigner function of ``rho`` by summing the Fock-basis Laguerre kernel."""
    if abs(rho.weight - 1.0) > 1e-9:
        raise NotNormalized(f"state has weight {rho.weight:.12g}")
    if rho.populations[-1] > 1e-10:
        raise CutoffTooSmall(f"top Fock level {rho.dim - 1} carries population {rho.populations[-1]:.3g}")
    ax = grid.axis()
    X, P = np.meshgrid(ax, ax)  # X[i, j] = ax[j], P[i, j] = ax[i]
    z = math.sqrt(2.0) * (X + 1j * P)
    B = np.abs(z) ** 2
    d = _effective_dim(rho)
    el = rho.elements
    acc = np.zeros_like(B)
    zk = np.ones_like(z)
    for k in range(d):
        # L_m^k(B) for m = 0..d-1-k by upward recurrence
        prev = np.zeros_like(B)
        cur = np.ones_like(B)
        for m in range(d - k):
            if m > 0:
                nxt = ((2 * m - 1 + k - B) * cur - (m - 1 + k) * prev) / m
                prev, cur = cur, nxt
            c = el[m, m + k]
            if c == 0:
                continue
            coef = (-1) ** m * c * math.exp(0.5 * (gammaln(m + 1) - gammaln(m + k + 1)))
            term = coef * zk * cur
            acc += (1.0 if k == 0 else 2.0) * term.real
        zk = zk * z
    values = acc * np.exp(-B / 2) / math.pi
    return WignerGrid(ax, ax.copy(), values)


def _to_xy(contour: np.ndarray, w: WignerGrid) -> np.ndarray:
    rows, cols = contour[:, 0], contour[:, 1]
    x = np.interp(cols, np.arange(w.x_axis.size), w.x_axis)
    p = np.interp(rows, np.arange(w.p_axis.size), w.p_axis)
    return np.column_stack([x, p])


def fwhm_contour(w: WignerGrid) -> ContourPolyline:
    """Closed level set at half the maximum, choosing the loop around the global maximum."""
    wmax = float(w.values.max())
    if wmax <= 0:
        raise NoClosedContour("Wigner function has no positive maximum")
    loops = [c for c in measure.find_contours(w.values, 0.5 * wmax) if len(c) > 3 and np.allclose(c[0], c[-1])]
    if not loops:
        raise NoClosedContour("no closed half-maximum contour inside the grid")
    peak = w.max_location()
    polys = [ContourPolyline(_to_xy(c, w), True) for c in loops]
    enclosing = [p for p in polys if _MplPath(p.points).contains_point(peak)]
    return max(enclosing or polys, key=lambda p: p.area())


def crescent_metric(c: ContourPolyline) -> float:
    """Isoperimetric deficit ``1 - 4 pi A / L^2``: 0 for a circle, larger when deformed."""
    if not c.closed:
        raise NoClosedContour("crescent metric needs a closed contour")
    L = c.perimeter()
    return 1.0 - 4 * math.pi * c.area() / (L * L)

"""Wigner functions against analytic forms, and half-maximum contour metrics."""

import math

import numpy as np
import pytest

from phaseconc.amplifier import thermal_subtracted_matrix
from phaseconc.errors import CutoffTooSmall, NoClosedContour, NotNormalized
from phaseconc.fock import FockDensityMatrix, coherent_state, displaced_thermal_state
from phaseconc.wigner import ContourPolyline, GridSpec, WignerGrid, crescent_metric, fwhm_contour, wigner_of

from conftest import ALPHA0, IDEAL_NTH, fock_state

SMALL = GridSpec(-4, 4, 81)


def _mesh(grid):
    ax = grid.axis()
    return np.meshgrid(ax, ax)


def test_coherent_is_shifted_gaussian():
    a = 0.7 - 0.4j
    w = wigner_of(coherent_state(a, 40), SMALL)
    X, P = _mesh(SMALL)
    ref = np.exp(-((X - math.sqrt(2) * a.real) ** 2) - (P - math.sqrt(2) * a.imag) ** 2) / math.pi
    # the Laguerre sum cancels in the far tails; absolute error relative to the 1/pi peak
    assert np.abs(w.values - ref).max() < 1e-10


def test_thermal_is_wide_gaussian():
    n = 0.6
    w = wigner_of(displaced_thermal_state(0, n, 60), SMALL)
    X, P = _mesh(SMALL)
    ref = np.exp(-(X**2 + P**2) / (2 * n + 1)) / (math.pi * (2 * n + 1))
    assert np.abs(w.values - ref).max() < 1e-13


def test_fock_states():
    X, P = _mesh(SMALL)
    r2 = X**2 + P**2
    w1 = wigner_of(fock_state(1, 10), SMALL)
    assert np.abs(w1.values - (2 * r2 - 1) * np.exp(-r2) / math.pi).max() < 1e-13
    w2 = wigner_of(fock_state(2, 10), SMALL)
    ref2 = (2 * r2**2 - 4 * r2 + 1) * np.exp(-r2) / math.pi
    assert np.abs(w2.values - ref2).max() < 1e-13
    assert w1.values[40, 40] * math.pi == pytest.approx(-1.0, abs=1e-14)


def test_normalization_and_bound_on_corpus(corpus):
    for name, rho in corpus.items():
        w = wigner_of(rho)
        assert abs(w.integral() - 1) < 1e-6, name
        assert np.abs(w.values).max() <= 1 / math.pi + 1e-12, name


def test_vacuum_contour():
    w = wigner_of(fock_state(0, 5))
    c = fwhm_contour(w)
    assert abs(c.mean_radius((0, 0)) / math.sqrt(math.log(2)) - 1) < 1e-3
    assert crescent_metric(c) < 1e-3


def test_coherent_contour_centroid():
    c = fwhm_contour(wigner_of(coherent_state(ALPHA0, 30)))
    cx, cp = c.centroid()
    assert abs(cx - math.sqrt(2) * ALPHA0) < 1e-3 and abs(cp) < 1e-9


def _crescent(M, grid=GridSpec()):
    rho, _ = thermal_subtracted_matrix(ALPHA0, IDEAL_NTH[M], M, 60)
    return crescent_metric(fwhm_contour(wigner_of(rho, grid)))


def test_crescent_grows_with_subtraction():
    vals = [_crescent(M) for M in (0, 2, 4, 6)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert vals == pytest.approx([1.9e-4, 0.01083, 0.04459, 0.06947], rel=0.05)


def test_crescent_grid_convergence():
    coarse = _crescent(4)
    fine = _crescent(4, GridSpec(-6, 6, 601))
    assert abs(coarse / fine - 1) < 0.01


def test_polyline_geometry():
    t = np.linspace(0, 2 * np.pi, 2001)
    c = ContourPolyline(np.column_stack([1 + 2 * np.cos(t), 2 * np.sin(t)]), True)
    assert c.area() == pytest.approx(4 * math.pi, rel=1e-5)
    assert c.perimeter() == pytest.approx(4 * math.pi, rel=1e-5)
    assert c.centroid() == pytest.approx((1.0, 0.0), abs=1e-9)
    sq = ContourPolyline(np.array([[0, 0], [1, 0], [1, 1], [0, 1.0]]), True)
    assert crescent_metric(sq) == pytest.approx(1 - math.pi / 4)
    with pytest.raises(NoClosedContour):
        crescent_metric(ContourPolyline(sq.points, False))


def test_errors():
    with pytest.raises(NotNormalized):
        wigner_of(FockDensityMatrix(0.5 * coherent_state(0.2, 10).elements))
    with pytest.raises(CutoffTooSmall):
        m = np.zeros((4, 4))
        m[3, 3] = 1.0
        wigner_of(FockDensityMatrix(m))
    # peak sits on the border: the half-maximum level set is not closed inside the grid
    w = wigner_of(coherent_state(2.0, 40), GridSpec(-1, 1, 41))
    with pytest.raises(NoClosedContour):
        fwhm_contour(w)
    with pytest.raises(NoClosedContour):
        fwhm_contour(WignerGrid(np.arange(3.0), np.arange(3.0), -np.ones((3, 3))))


def test_csv_roundtrip(tmp_path):
    w = wigner_of(coherent_state(0.2, 20), GridSpec(-2, 2, 11))
    path = tmp_path / "w.csv"
    w.to_csv(path, "demo")
    lines = path.read_text().splitlines()
    assert lines[0] == "# demo" and lines[1] == "x,p,W" and len(lines) == 2 + 121
    data = np.loadtxt(path, delimiter=",", skiprows=2)
    assert np.allclose(data[:, 2].reshape(11, 11), w.values, rtol=1e-11, atol=1e-15)

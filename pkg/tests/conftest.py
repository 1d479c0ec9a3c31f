import math

import numpy as np
import pytest

from phaseconc.amplifier import add_then_subtract, thermal_subtracted_matrix
from phaseconc.feasible import SubtractionSetup, feasible_subtract
from phaseconc.fock import FockDensityMatrix, coherent_state, displaced_thermal_state

ALPHA0 = 0.2  # N = 0.04
# noise levels close to the optimized ones for each order (ideal sweep at N = 0.04)
IDEAL_NTH = {0: 1e-3, 1: 0.136094, 2: 0.166011, 3: 0.17864, 4: 0.184248, 5: 0.186327, 6: 0.18642}


def fock_state(n: int, dim: int) -> FockDensityMatrix:
    m = np.zeros((dim, dim), dtype=complex)
    m[n, n] = 1.0
    return FockDensityMatrix(m)


def build_corpus(dim: int = 60) -> dict:
    """Normalized states spanning every construction route in the package."""
    c = {
        "vacuum": fock_state(0, dim),
        "fock1": fock_state(1, dim),
        "coherent_0.2": coherent_state(ALPHA0, dim),
        "coherent_1.5i": coherent_state(1.5j, dim),
        "thermal_0.5": displaced_thermal_state(0.0, 0.5, dim),
        "displaced_thermal": displaced_thermal_state(0.7, 0.3, dim),
        "addsub_M1": add_then_subtract(ALPHA0, 1, dim),
        "addsub_M3": add_then_subtract(0.5, 3, dim),
        "feasible_M2": feasible_subtract(ALPHA0, 0.17, SubtractionSetup(0.9, 0.4, 2), dim).state,
    }
    for M in (0, 2, 4, 6):
        c[f"ideal_M{M}"] = thermal_subtracted_matrix(ALPHA0, IDEAL_NTH[M], M, dim)[0]
    return c


@pytest.fixture(scope="session")
def corpus():
    return build_corpus()


@pytest.fixture
def report(capsys):
    """Print one visible line even when pytest captures output."""

    def emit(line: str) -> None:
        with capsys.disabled():
            print(f"\n{line}")

    return emit


def rel(a, b) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


__all__ = ["ALPHA0", "IDEAL_NTH", "build_corpus", "fock_state", "rel", "math"]

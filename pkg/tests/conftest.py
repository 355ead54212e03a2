import numpy as np
import pytest

from rtoa.core import Basis, Representation, SpinorField


def bump(p, lo, hi):
    """C-infinity bump supported on (lo, hi)."""
    p = np.asarray(p, dtype=float)
    u = (2.0 * p - (lo + hi)) / (hi - lo)
    out = np.zeros_like(p)
    m = np.abs(u) < 1.0
    out[m] = np.exp(-1.0 / (1.0 - u[m] ** 2))
    return out


def phi_field(grid, upper, lower=None) -> SpinorField:
    grid = np.asarray(grid, dtype=float)
    upper = np.asarray(upper, dtype=complex)
    lower = np.zeros_like(upper) if lower is None else np.asarray(lower, dtype=complex)
    return SpinorField(Representation.FESHBACH_VILLARS_PHI, Basis.MOMENTUM, grid, upper, lower)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

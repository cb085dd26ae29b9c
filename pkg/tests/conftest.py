import numpy as np
import pytest

from finslerlab.points import Point


def make_points(n, count, seed=0, z_lo=-0.5, z_hi=0.5, v_lo=0.3, v_hi=1.2):
    """Deterministic consistent sample points, clear of every catalog
    metric's singular locus for the default boxes."""
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(count):
        z = rng.uniform(z_lo, z_hi, 2 * n)
        v = rng.uniform(v_lo, v_hi, 2 * n)
        pts.append(Point(z[:n] + 1j * z[n:], v[:n] + 1j * v[n:]))
    return pts


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from lambda_bloch.model import DriveGeometry, LiouvilleState, SystemParams

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def log_uniform(lo_exp: float, hi_exp: float):
    return st.floats(lo_exp, hi_exp).map(lambda e: 10.0 ** e)


@st.composite
def symmetric_params(draw, nbar=(-4, 4), y=(-3, 3), gamma=(6, 10), p=None):
    g = draw(log_uniform(*gamma))
    n = draw(log_uniform(*nbar))
    yy = draw(log_uniform(*y))
    pp = draw(st.floats(-1, 1)) if p is None else p
    return SystemParams.symmetric(g, n, delta_over_gamma=yy, p=pp)


@st.composite
def general_params(draw):
    g1 = draw(log_uniform(6, 10))
    g2 = g1 * draw(log_uniform(-1, 1))
    n = draw(log_uniform(-3, 3))
    y = draw(log_uniform(-3, 3))
    pp = draw(st.floats(-1, 1))
    return SystemParams(g1, g2, n, y * g1, pp)


@st.composite
def polarized_params(draw):
    g = draw(log_uniform(6, 10))
    n = draw(log_uniform(-4, 4))
    y = draw(log_uniform(-3, 3))
    return SystemParams.symmetric(g, n, delta_over_gamma=y, drive_geometry=DriveGeometry.POLARIZED_X)


@st.composite
def density_states(draw, symmetric=False):
    """Valid states: populations in the simplex, coherence within the positivity disk."""
    a = draw(st.floats(0, 1))
    if symmetric:
        g1 = g2 = 0.5 * a
    else:
        b = draw(st.floats(0, 1))
        g1, g2 = a * b, a * (1 - b)
    radius = draw(st.floats(0, 1)) * np.sqrt(g1 * g2)
    phase = draw(st.floats(0, 2 * np.pi))
    return LiouvilleState(g1, g2, radius * np.cos(phase), radius * np.sin(phase))


def random_params(rng: np.random.Generator, n: int) -> list[SystemParams]:
    """Log-uniform physical draws for the oracle cross-checks."""
    out = []
    for _ in range(n):
        out.append(SystemParams.symmetric(
            10 ** rng.uniform(6, 10), 10 ** rng.uniform(-4, 4),
            delta_over_gamma=10 ** rng.uniform(-3, 4), p=rng.uniform(-1, 1)))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

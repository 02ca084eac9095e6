from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lambda_bloch.generator import build_general_isotropic, build_symmetric_isotropic
from lambda_bloch.model import (
    BadTrace,
    DriveGeometry,
    LiouvilleState,
    Method,
    NonPhysical,
    NotPositive,
    SystemParams,
    Trajectory,
    state_from_density,
    validate_params,
)

from conftest import symmetric_params


def test_isotropic_rate():
    p = validate_params({"gamma": 1e9, "nbar": 1e-3, "delta": 1e7, "p": 1})
    assert p.r1 == pytest.approx(1e6, rel=1e-15)
    assert p.r2 == p.r1


def test_polarized_rate():
    p = validate_params({"gamma": 1e8, "nbar": 1e-3, "delta": 0.0, "geometry": "polarized"})
    assert p.r == pytest.approx(3 / (16 * math.pi) * 1e5, rel=1e-15)
    assert p.r == pytest.approx(5.968e3, rel=1e-4)
    assert p.p == 0.0


@pytest.mark.parametrize("raw, field", [
    ({"gamma": -1, "nbar": 1, "delta": 1}, "gamma"),
    ({"gamma": 1, "nbar": -1, "delta": 1}, "nbar"),
    ({"gamma": 1, "nbar": 1, "delta": -1}, "delta"),
    ({"gamma": 1, "nbar": 1, "delta": 1, "p": 1.5}, "p"),
    ({"gamma": 1, "nbar": float("nan"), "delta": 1}, "nbar"),
    ({"gamma": float("inf"), "nbar": 1, "delta": 1}, "gamma1"),
    ({"gamma": 1, "nbar": 1}, "delta"),
    ({"gamma": 1, "nbar": 1, "delta": 1, "p": 0.3, "geometry": "polarized"}, "p"),
])
def test_validation_errors(raw, field):
    with pytest.raises(NonPhysical) as err:
        validate_params(raw)
    assert err.value.field == field


def test_delta_over_gamma_and_asymmetric_rates():
    p = validate_params({"gamma1": 2.0, "gamma2": 3.0, "nbar": 0.5, "delta_over_gamma": 4.0})
    assert p.delta == 8.0
    assert (p.r1, p.r2) == (1.0, 1.5)
    assert not p.is_symmetric()


def test_state_examples():
    mixed = state_from_density(0.5, 0.5, 0)
    assert (mixed.rho_g1g1, mixed.rho_g2g2, mixed.rho_R, mixed.rho_I) == (0.5, 0.5, 0.0, 0.0)
    assert mixed.rho_ee == 0.0
    coherent = state_from_density(0.5, 0.5, 0.5 + 0j)
    assert coherent.coherence == 0.5
    with pytest.raises(NotPositive):
        state_from_density(0.5, 0.5, 0.6 + 0j)
    with pytest.raises(BadTrace):
        state_from_density(0.7, 0.5, 0)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 2 * math.pi))
def test_round_trip_is_exact(a, b, radius, phase):
    g1, g2 = a * b, a * (1 - b)
    c = complex(radius * math.sqrt(g1 * g2) * math.cos(phase), radius * math.sqrt(g1 * g2) * math.sin(phase))
    s = state_from_density(g1, g2, c)
    assert (s.rho_g1g1, s.rho_g2g2, complex(s.rho_R, s.rho_I)) == (g1, g2, c)


@given(symmetric_params())
def test_symmetric_params_build_both_generators(params):
    assert params.is_symmetric()
    assert build_symmetric_isotropic(params).dimension == 3
    assert build_general_isotropic(params).dimension == 4


def test_density_matrix_is_hermitian_with_unit_trace():
    s = LiouvilleState(0.3, 0.2, 0.1, -0.05)
    rho = s.density_matrix()
    assert np.allclose(rho, rho.conj().T)
    assert np.trace(rho).real == pytest.approx(1.0)


def test_trajectory_invariants():
    comps = np.tile([0.5, 0.5, 0.0, 0.0], (3, 1))
    tr = Trajectory([0.0, 1.0, 2.0], comps, Method.SPECTRAL)
    assert len(tr) == 3 and len(tr.states) == 3
    assert tr.method is Method.SPECTRAL
    with pytest.raises(ValueError):
        Trajectory([0.0, 0.0, 1.0], comps, "ode")
    with pytest.raises(ValueError):
        Trajectory([0.0, 1.0], comps, "ode")


def test_params_are_immutable():
    p = SystemParams.symmetric(1.0, 1.0, 1.0)
    with pytest.raises(AttributeError):
        p.nbar = 2.0
    assert p.with_(nbar=2.0).nbar == 2.0
    assert p.drive_geometry is DriveGeometry.ISOTROPIC

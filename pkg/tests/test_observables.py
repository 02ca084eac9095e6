from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lambda_bloch.dynamics import propagate, propagate_ode
from lambda_bloch.generator import build_generator
from lambda_bloch.model import (
    COHERENT_STATE,
    LiouvilleState,
    NotPositive,
    SingularGenerator,
    SystemParams,
)
from lambda_bloch.observables import (
    density_eigenvalues,
    entropy,
    entropy_series,
    steady_state,
    steady_state_numeric,
    steady_state_polarized,
    steady_state_thermal,
    thermal_deviation,
)
from lambda_bloch.spectral import eigenvalues

from conftest import density_states, polarized_params, symmetric_params

FIG3B = SystemParams.symmetric(1e8, 1e-3, delta_over_gamma=1e-2, drive_geometry="polarized")


@pytest.mark.parametrize("state, s", [
    (LiouvilleState(0.5, 0.5), math.log(2)),
    (LiouvilleState(0.5, 0.5, 0.5, 0.0), 0.0),
    (LiouvilleState(1 / 3, 1 / 3), math.log(3)),
])
def test_entropy_examples(state, s):
    assert entropy(state) == pytest.approx(s, abs=1e-12)


def test_entropy_rejects_negative_eigenvalue():
    with pytest.raises(NotPositive):
        entropy(LiouvilleState(0.5, 0.5, 0.6, 0.0))
    # rounding-level negatives are clipped
    assert entropy(LiouvilleState(0.5, 0.5, 0.5 + 1e-12, 0.0)) == pytest.approx(0.0, abs=1e-9)


def test_asymmetric_eigenvalues():
    eigs = density_eigenvalues(0.6, 0.2, 0.1, 0.1)
    rho = LiouvilleState(0.6, 0.2, 0.1, 0.1).density_matrix()
    np.testing.assert_allclose(np.sort(eigs), np.sort(np.linalg.eigvalsh(rho)), atol=1e-15)


@given(density_states())
def test_entropy_bounds(state):
    s = entropy(state)
    assert -1e-12 <= s <= math.log(3) + 1e-12


def test_polarized_dark_state():
    ss = steady_state_polarized(FIG3B.with_(delta=0.0))
    assert (ss.rho_g1g1, ss.rho_g2g2, ss.rho_R, ss.rho_I) == (0.5, 0.5, -0.5, 0.0)
    assert ss.rho_ee == 0.0


def test_polarized_large_splitting_is_thermal():
    params = FIG3B.with_(delta=1e6 * FIG3B.gamma)
    ss, th = steady_state_polarized(params), steady_state_thermal(params)
    assert ss.rho_g1g1 == pytest.approx(th.rho_g1g1, abs=1e-12)
    assert abs(ss.rho_R) < 1e-12


def test_polarized_singular():
    with pytest.raises(SingularGenerator):
        steady_state_polarized(FIG3B.with_(nbar=0.0, delta=0.0))


@given(polarized_params())
def test_polarized_formula_is_fixed_point(params):
    ss = steady_state_polarized(params).as_array()
    num = steady_state_numeric(build_generator(params)).as_array()
    assert np.max(np.abs(ss - num)) < 1e-12
    assert steady_state_polarized(params).rho_I == pytest.approx(
        -params.delta / params.r * steady_state_polarized(params).rho_R, rel=1e-12, abs=1e-300)


def test_polarized_long_time_integration_fig3b():
    gen = build_generator(FIG3B)
    slow = min(abs(v.real) for v in np.linalg.eigvals(gen.A))
    traj = propagate_ode(gen, LiouvilleState(0.5, 0.5), [40.0 / slow], integrator="LSODA")
    assert np.max(np.abs(traj.components[0] - steady_state_polarized(FIG3B).as_array())) < 1e-8


@pytest.mark.parametrize("nbar, value", [(1.0, 0.4), (0.0, 0.5), (1e12, 1 / 3)])
def test_thermal_examples(nbar, value):
    assert steady_state_thermal(SystemParams.symmetric(1.0, nbar, 1.0)).rho_g1g1 == pytest.approx(value, rel=1e-11)


def test_thermal_deviation():
    params = FIG3B.with_(delta=0.0)
    r, g = params.r, params.gamma
    dev = thermal_deviation(params)
    assert dev.population == pytest.approx(0.5 - (r + g) / (3 * r + 2 * g), rel=1e-14)
    assert dev.coherence == 0.5
    assert abs(thermal_deviation(FIG3B.with_(delta=1e4 * r)).population) < 1e-6
    # coherence falls off only as r / (2 Delta)
    far = thermal_deviation(FIG3B.with_(delta=1e6 * r))
    assert far.coherence == pytest.approx(0.5e-6, rel=1e-3)


def test_coherence_decreases_with_splitting():
    rs = [abs(steady_state_polarized(FIG3B.with_(delta=d)).rho_R) for d in np.geomspace(1e-3, 1e3, 60) * FIG3B.r]
    assert np.all(np.diff(rs) < 0)


def test_steady_state_dispatch():
    iso = SystemParams.symmetric(1.0, 1.0, 1.0, p=0.7)
    assert steady_state(iso) == steady_state_thermal(iso)
    assert steady_state(FIG3B) == steady_state_polarized(FIG3B)


@given(symmetric_params(nbar=(-3, 2), y=(-2, 2)), st.floats(-1, 1), density_states(symmetric=True))
def test_isotropic_relaxes_to_thermal(params, p, state):
    params = params.with_(p=p)
    slow = min(abs(v.real) for v in eigenvalues(params))
    final = propagate(build_generator(params), state, [20.0 / slow]).state(0)
    th = steady_state_thermal(params)
    assert abs(final.rho_g1g1 - th.rho_g1g1) < 1e-6
    assert abs(final.coherence) < 1e-6


def test_secular_entropy_is_non_decreasing():
    params = SystemParams.symmetric(1e9, 1e3, delta_over_gamma=1e2, p=0.0)
    t = np.linspace(0, 20 / params.r, 2000)
    s = entropy_series(propagate(build_generator(params), COHERENT_STATE, t))
    assert s[0] == pytest.approx(0.0, abs=1e-12)
    assert np.min(np.diff(s)) > -1e-6

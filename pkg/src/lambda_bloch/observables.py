"""Entropy, steady states and deviations from thermal equilibrium."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .generator import Generator
from .model import (
    DriveGeometry,
    LiouvilleState,
    NotPositive,
    SingularGenerator,
    SystemParams,
    Trajectory,
)

CLIP_TOL = 1e-9


def density_eigenvalues(g11, g22, re, im):
    """Eigenvalues ``(rho_ee, lambda_+, lambda_-)`` of the block-diagonal density matrix.

    Vectorized over equal-shape inputs.
    """
    g11, g22 = np.asarray(g11, float), np.asarray(g22, float)
    c2 = np.asarray(re, float) ** 2 + np.asarray(im, float) ** 2
    root = np.sqrt((g11 - g22) ** 2 + 4.0 * c2)
    s = g11 + g22
    return np.stack([1.0 - s, 0.5 * (s + root), 0.5 * (s - root)], axis=-1)


def _entropy_from_eigs(eigs: np.ndarray) -> np.ndarray:
    if np.any(eigs < -CLIP_TOL):
        raise NotPositive(f"density matrix eigenvalue {eigs.min():.3e} below -{CLIP_TOL:g}")
    eigs = np.clip(eigs, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(eigs > 0, -eigs * np.log(eigs), 0.0)
    return terms.sum(axis=-1)


def entropy(state: LiouvilleState) -> float:
    """von Neumann entropy in nats; ``0 ln 0 = 0``.

    Eigenvalues in ``[-1e-9, 0)`` are treated as zero.

    Raises
    ------
    NotPositive
        An eigenvalue below ``-1e-9``.
    """
    eigs = density_eigenvalues(state.rho_g1g1, state.rho_g2g2, state.rho_R, state.rho_I)
    return float(_entropy_from_eigs(eigs))


def entropy_series(trajectory: Trajectory) -> np.ndarray:
    """Entropy at every sample of a trajectory."""
    c = trajectory.components
    return _entropy_from_eigs(density_eigenvalues(c[:, 0], c[:, 1], c[:, 2], c[:, 3]))


def population_inversion(trajectory: Trajectory) -> np.ndarray:
    """``rho_ee - rho_g1g1`` along a trajectory."""
    return trajectory.population_difference


def _polarized_denominator(r: float, g: float, delta: float) -> float:
    return (3.0 * r + 2.0 * g) * delta ** 2 + 2.0 * r * r * g


def steady_state_polarized(params: SystemParams) -> LiouvilleState:
    """Closed-form steady state under x-polarized pumping.

    Raises
    ------
    SingularGenerator
        ``r == 0`` and ``Delta == 0``, where the fixed point is not unique.
    """
    if params.drive_geometry is not DriveGeometry.POLARIZED_X:
        raise ValueError("steady_state_polarized needs the polarized drive geometry")
    params.require_symmetric()
    r, g, delta = params.r, params.gamma, params.delta
    den = _polarized_denominator(r, g, delta)
    if den == 0:
        raise SingularGenerator("det(A) = 0: steady state is not unique")
    gg = ((r + g) * delta ** 2 + r * r * g) / den
    re = -r * r * g / den
    im = delta * r * g / den
    return LiouvilleState(gg, gg, re, im)


def steady_state_thermal(params: SystemParams) -> LiouvilleState:
    """Canonical populations ``(r+gamma)/(3r+2gamma)`` with no coherence."""
    params.require_symmetric()
    r, g = params.r, params.gamma
    gg = (r + g) / (3.0 * r + 2.0 * g)
    return LiouvilleState(gg, gg, 0.0, 0.0)


def steady_state_numeric(generator: Generator) -> LiouvilleState:
    """Fixed point ``-A^{-1} d`` of any generator."""
    try:
        x = generator.fixed_point()
    except np.linalg.LinAlgError as exc:
        raise SingularGenerator(str(exc)) from exc
    return generator.from_vector(x)


def steady_state(params: SystemParams) -> LiouvilleState:
    """Closed-form steady state for the params' drive geometry."""
    if params.drive_geometry is DriveGeometry.POLARIZED_X:
        return steady_state_polarized(params)
    return steady_state_thermal(params)


@dataclass(frozen=True)
class ThermalDeviation:
    population: float
    coherence: float

    def to_dict(self) -> dict:
        return {"population_deviation": self.population, "coherence_magnitude": self.coherence}


def thermal_deviation(params: SystemParams) -> ThermalDeviation:
    """Distance of the polarized steady state from the thermal one."""
    ss = steady_state_polarized(params)
    th = steady_state_thermal(params)
    return ThermalDeviation(ss.rho_g1g1 - th.rho_g1g1, abs(ss.coherence))

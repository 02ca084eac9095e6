"""Bloch-Redfield dynamics of an incoherently driven three-level Lambda system.

The package builds the affine Liouville-space generator, classifies the
dynamics through the discriminant of its characteristic cubic, propagates
density matrices exactly and numerically, and evaluates closed-form
solutions, steady states and entropies.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .model import (
    COHERENT_STATE,
    MIXED_STATE,
    DriveGeometry,
    LiouvilleState,
    Method,
    SystemParams,
    Trajectory,
    state_from_density,
    validate_params,
)
from .generator import Generator, build_generator
from .regimes import Regime, RegimeReport, discriminant
from .spectral import EigenTriple, eigenvalues, eigenvalues_cardano, eigenvalues_numeric
from .dynamics import propagate, propagate_ode, propagate_spectral, analytic_underdamped
from .observables import entropy, entropy_series, steady_state

__all__ = [
    "COHERENT_STATE", "MIXED_STATE", "DriveGeometry", "LiouvilleState", "Method", "SystemParams",
    "Trajectory", "state_from_density", "validate_params", "Generator", "build_generator",
    "Regime", "RegimeReport", "discriminant", "EigenTriple", "eigenvalues", "eigenvalues_cardano",
    "eigenvalues_numeric", "propagate", "propagate_ode", "propagate_spectral",
    "analytic_underdamped", "entropy", "entropy_series", "steady_state",
]

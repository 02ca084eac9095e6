"""Affine Bloch-Redfield generators ``x' = A x + d`` in the Liouville representation.

Two reductions are provided. The symmetric one acts on
``(rho_g1g1, rho_R, rho_I)`` and assumes ``rho_g1g1 == rho_g2g2``; the general
one acts on ``(rho_g1g1, rho_g2g2, rho_R, rho_I)``. In both the excited-state
population is eliminated through the trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    Asymmetric,
    DriveGeometry,
    LiouvilleState,
    SystemParams,
)

SYMMETRIC_SUBSPACE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Generator:
    """Coefficient matrix and constant drive of the linear flow.

    Attributes
    ----------
    a_matrix : ndarray, shape (n, n)
    d_vector : ndarray, shape (n,)
    dimension : int
        3 for the symmetric reduction, 4 for the general one.
    geometry : DriveGeometry
    """

    a_matrix: np.ndarray
    d_vector: np.ndarray
    dimension: int
    geometry: DriveGeometry = DriveGeometry.ISOTROPIC

    def __post_init__(self):
        a = np.array(self.a_matrix, dtype=float)
        d = np.array(self.d_vector, dtype=float)
        if a.shape != (self.dimension, self.dimension) or d.shape != (self.dimension,):
            raise ValueError(f"inconsistent shapes {a.shape}, {d.shape} for dimension {self.dimension}")
        a.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "a_matrix", a)
        object.__setattr__(self, "d_vector", d)

    @property
    def A(self) -> np.ndarray:
        return self.a_matrix

    @property
    def d(self) -> np.ndarray:
        return self.d_vector

    def rhs(self, x: np.ndarray) -> np.ndarray:
        """Time derivative at ``x``; accepts ``(n,)`` or ``(n, m)`` input."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return self.a_matrix @ x + self.d_vector
        return self.a_matrix @ x + self.d_vector[:, None]

    def to_vector(self, state: LiouvilleState) -> np.ndarray:
        if self.dimension == 4:
            return state.as_array()
        if abs(state.rho_g1g1 - state.rho_g2g2) > SYMMETRIC_SUBSPACE_TOL:
            raise ValueError("the symmetric reduction requires rho_g1g1 == rho_g2g2")
        return np.array([state.rho_g1g1, state.rho_R, state.rho_I])

    def from_vector(self, x: np.ndarray) -> LiouvilleState:
        return LiouvilleState(*self.expand(x))

    def expand(self, x: np.ndarray) -> np.ndarray:
        """Map reduced vectors (last axis) to the four stored components."""
        x = np.asarray(x, dtype=float)
        if self.dimension == 4:
            return x
        return np.stack([x[..., 0], x[..., 0], x[..., 1], x[..., 2]], axis=-1)

    def fixed_point(self) -> np.ndarray:
        """``-A^{-1} d``; raises ``numpy.linalg.LinAlgError`` if A is singular."""
        return -np.linalg.solve(self.a_matrix, self.d_vector)


def _require_symmetric(params: SystemParams) -> None:
    if not params.is_symmetric():
        raise Asymmetric(f"gamma1={params.gamma1!r} != gamma2={params.gamma2!r}")


def _require_geometry(params: SystemParams, geometry: DriveGeometry) -> None:
    if params.drive_geometry is not geometry:
        raise ValueError(f"expected {geometry.value} drive, got {params.drive_geometry.value}")


def build_symmetric_isotropic(params: SystemParams) -> Generator:
    """3x3 generator for gamma1 == gamma2 under isotropic pumping.

    Rows are the equations for ``rho_g1g1``, ``rho_R`` and ``rho_I``. The
    population row couples to the coherence only through ``p r``, so ``p = 0``
    decouples the two blocks.
    """
    _require_symmetric(params)
    _require_geometry(params, DriveGeometry.ISOTROPIC)
    r, g, p, delta = params.r, params.gamma, params.p, params.delta
    a = 3.0 * r + 2.0 * g
    A = np.array([
        [-a, -p * r, 0.0],
        [-p * a, -r, delta],
        [0.0, -delta, -r],
    ])
    d = np.array([r + g, p * (r + g), 0.0])
    return Generator(A, d, 3, DriveGeometry.ISOTROPIC)


def build_general_isotropic(params: SystemParams) -> Generator:
    """4x4 generator allowing unequal decay and pumping rates."""
    _require_geometry(params, DriveGeometry.ISOTROPIC)
    r1, r2, g1, g2 = params.r1, params.r2, params.gamma1, params.gamma2
    p, delta = params.p, params.delta
    s = math.sqrt(r1 * r2)
    sg = math.sqrt(g1 * g2)
    rbar = 0.5 * (r1 + r2)
    # coherence row: p(s + sg) rho_ee - (p s / 2)(rho_11 + rho_22), rho_ee eliminated
    c = -p * (1.5 * s + sg)
    A = np.array([
        [-(2 * r1 + g1), -(r1 + g1), -p * s, 0.0],
        [-(r2 + g2), -(2 * r2 + g2), -p * s, 0.0],
        [c, c, -rbar, delta],
        [0.0, 0.0, -delta, -rbar],
    ])
    d = np.array([r1 + g1, r2 + g2, p * (s + sg), 0.0])
    return Generator(A, d, 4, DriveGeometry.ISOTROPIC)


def build_symmetric_polarized(params: SystemParams) -> Generator:
    """3x3 generator for x-polarized pumping of orthogonal dipoles.

    The pumping cross-terms enter with unit weight and spontaneous emission
    carries no interference term.
    """
    _require_symmetric(params)
    _require_geometry(params, DriveGeometry.POLARIZED_X)
    r, g, delta = params.r, params.gamma, params.delta
    A = np.array([
        [-(3.0 * r + 2.0 * g), -r, 0.0],
        [-3.0 * r, -r, delta],
        [0.0, -delta, -r],
    ])
    d = np.array([r + g, r, 0.0])
    return Generator(A, d, 3, DriveGeometry.POLARIZED_X)


def build_general_polarized(params: SystemParams) -> Generator:
    """4x4 polarized generator; reduces to :func:`build_symmetric_polarized`."""
    _require_geometry(params, DriveGeometry.POLARIZED_X)
    r1, r2, g1, g2 = params.r1, params.r2, params.gamma1, params.gamma2
    delta = params.delta
    s = math.sqrt(r1 * r2)
    rbar = 0.5 * (r1 + r2)
    A = np.array([
        [-(2 * r1 + g1), -(r1 + g1), -s, 0.0],
        [-(r2 + g2), -(2 * r2 + g2), -s, 0.0],
        [-1.5 * s, -1.5 * s, -rbar, delta],
        [0.0, 0.0, -delta, -rbar],
    ])
    d = np.array([r1 + g1, r2 + g2, s, 0.0])
    return Generator(A, d, 4, DriveGeometry.POLARIZED_X)


def build_generator(params: SystemParams, reduced: bool | None = None) -> Generator:
    """Pick the builder matching the drive geometry.

    ``reduced=None`` uses the 3x3 form whenever the rates are symmetric.
    """
    if reduced is None:
        reduced = params.is_symmetric()
    if params.drive_geometry is DriveGeometry.POLARIZED_X:
        return build_symmetric_polarized(params) if reduced else build_general_polarized(params)
    return build_symmetric_isotropic(params) if reduced else build_general_isotropic(params)

"""Domain types shared by the rest of the package.

Rates are stored in absolute units (1/s) and the excited-state population
is never stored: it is always reconstructed as ``1 - rho_g1g1 - rho_g2g2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Any, Iterator, Mapping

import numpy as np

#: Polarized pumping rates are attenuated by 16*pi/3 relative to isotropic ones.
POLARIZED_ATTENUATION = 3.0 / (16.0 * math.pi)

CONSTRUCTION_TOL = 1e-12
PROPAGATION_TOL = 1e-9


class NonPhysical(ValueError):
    """A parameter lies outside its physical domain."""

    def __init__(self, field_name: str, message: str = ""):
        self.field = field_name
        super().__init__(f"{field_name}: {message}" if message else field_name)


class NotPositive(ValueError):
    """Density matrix components violate positivity."""


class BadTrace(ValueError):
    """Ground-state populations exceed unit trace."""


class Asymmetric(ValueError):
    """A symmetric-only routine received gamma1 != gamma2."""


class WrongRegime(ValueError):
    """The parameters lie outside the validity domain of a formula."""


class DegenerateP(ValueError):
    """Quantity undefined at p == 0."""


class SingularGenerator(ArithmeticError):
    """The coefficient matrix has no inverse, so the fixed point is not unique."""


class NearDegenerate(ArithmeticError):
    """Eigenvalues too close for a well-conditioned eigendecomposition."""


class StepFailure(RuntimeError):
    """The adaptive integrator could not advance."""


class NoConvergence(RuntimeError):
    """The dense eigensolver did not converge."""


class NoBoundary(ValueError):
    """A regime map contains a single regime."""


class DriveGeometry(str, enum.Enum):
    ISOTROPIC = "isotropic"
    POLARIZED_X = "polarized"


def _finite(name: str, value: float) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise NonPhysical(name, f"not a number: {value!r}") from None
    if not math.isfinite(value):
        raise NonPhysical(name, "must be finite")
    return value


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of one Lambda-system instance.

    Parameters
    ----------
    gamma1, gamma2 : float
        Spontaneous decay rates of ``|e>`` into ``|g1>`` and ``|g2>`` [1/s].
    nbar : float
        Mean occupation number of the thermal field.
    delta : float
        Ground-state splitting [rad/s].
    p : float
        Transition dipole alignment factor. Fixed to 0 for
        ``DriveGeometry.POLARIZED_X`` (orthogonal dipoles).
    drive_geometry : DriveGeometry
        Isotropic or x-polarized incoherent excitation.
    """

    gamma1: float
    gamma2: float
    nbar: float
    delta: float
    p: float = 0.0
    drive_geometry: DriveGeometry = DriveGeometry.ISOTROPIC

    def __post_init__(self):
        g1 = _finite("gamma1", self.gamma1)
        g2 = _finite("gamma2", self.gamma2)
        nbar = _finite("nbar", self.nbar)
        delta = _finite("delta", self.delta)
        p = _finite("p", self.p)
        if g1 <= 0:
            raise NonPhysical("gamma1", "decay rate must be positive")
        if g2 <= 0:
            raise NonPhysical("gamma2", "decay rate must be positive")
        if nbar < 0:
            raise NonPhysical("nbar", "occupation number must be non-negative")
        if delta < 0:
            raise NonPhysical("delta", "splitting must be non-negative")
        if not -1.0 <= p <= 1.0:
            raise NonPhysical("p", "alignment factor must lie in [-1, 1]")
        geometry = DriveGeometry(self.drive_geometry)
        if geometry is DriveGeometry.POLARIZED_X and p != 0.0:
            raise NonPhysical("p", "p is fixed by the polarized drive geometry")
        for name, value in (("gamma1", g1), ("gamma2", g2), ("nbar", nbar),
                            ("delta", delta), ("p", p), ("drive_geometry", geometry)):
            object.__setattr__(self, name, value)

    @classmethod
    def symmetric(cls, gamma: float, nbar: float, delta: float | None = None, *,
                  delta_over_gamma: float | None = None, p: float = 0.0,
                  drive_geometry: DriveGeometry | str = DriveGeometry.ISOTROPIC) -> SystemParams:
        """Symmetric system (gamma1 == gamma2) from either ``delta`` or ``delta/gamma``."""
        if (delta is None) == (delta_over_gamma is None):
            raise ValueError("give exactly one of delta and delta_over_gamma")
        if delta is None:
            delta = _finite("delta_over_gamma", delta_over_gamma) * gamma
        return cls(gamma, gamma, nbar, delta, p, DriveGeometry(drive_geometry))

    @property
    def is_polarized(self) -> bool:
        return self.drive_geometry is DriveGeometry.POLARIZED_X

    def is_symmetric(self) -> bool:
        return self.gamma1 == self.gamma2

    @property
    def r1(self) -> float:
        return self._rate(self.gamma1)

    @property
    def r2(self) -> float:
        return self._rate(self.gamma2)

    def _rate(self, gamma: float) -> float:
        if self.is_polarized:
            return POLARIZED_ATTENUATION * gamma * self.nbar
        return self.nbar * gamma

    @property
    def gamma(self) -> float:
        """Common decay rate of a symmetric system."""
        self.require_symmetric()
        return self.gamma1

    @property
    def r(self) -> float:
        """Common pumping rate of a symmetric system."""
        self.require_symmetric()
        return self.r1

    @property
    def delta_over_gamma(self) -> float:
        return self.delta / self.gamma

    def require_symmetric(self) -> None:
        if not self.is_symmetric():
            raise Asymmetric(f"gamma1={self.gamma1!r} != gamma2={self.gamma2!r}")

    def with_(self, **changes: Any) -> SystemParams:
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return {
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "nbar": self.nbar,
            "delta": self.delta,
            "p": self.p,
            "drive_geometry": self.drive_geometry.value,
            "r1": self.r1,
            "r2": self.r2,
        }


def validate_params(raw: Mapping[str, Any]) -> SystemParams:
    """Build :class:`SystemParams` from a loose parameter record.

    Accepts ``gamma`` (symmetric) or ``gamma1``/``gamma2``, and ``delta`` or
    ``delta_over_gamma``. ``p`` may not be supplied for the polarized geometry.

    Raises
    ------
    NonPhysical
        Missing, non-finite or out-of-range fields.
    """
    raw = {k: v for k, v in raw.items() if v is not None}
    geometry_raw = raw.get("drive_geometry", raw.get("geometry", DriveGeometry.ISOTROPIC))
    try:
        geometry = DriveGeometry(geometry_raw)
    except ValueError:
        raise NonPhysical("drive_geometry", f"unknown geometry {geometry_raw!r}") from None

    if "gamma1" in raw or "gamma2" in raw:
        gamma1 = raw.get("gamma1", raw.get("gamma"))
        gamma2 = raw.get("gamma2", gamma1)
    else:
        gamma1 = gamma2 = raw.get("gamma")
    if gamma1 is None:
        raise NonPhysical("gamma", "missing")
    gamma1 = _finite("gamma1", gamma1)
    gamma2 = _finite("gamma2", gamma2)
    if gamma1 <= 0:
        raise NonPhysical("gamma", "decay rate must be positive")

    if "nbar" not in raw:
        raise NonPhysical("nbar", "missing")

    if "delta" in raw:
        delta = raw["delta"]
    elif "delta_over_gamma" in raw:
        delta = _finite("delta_over_gamma", raw["delta_over_gamma"]) * gamma1
    else:
        raise NonPhysical("delta", "missing")

    if geometry is DriveGeometry.POLARIZED_X:
        if "p" in raw:
            raise NonPhysical("p", "p is fixed by the polarized drive geometry")
        p = 0.0
    else:
        p = raw.get("p", 0.0)

    return SystemParams(gamma1, gamma2, raw["nbar"], delta, p, geometry)


@dataclass(frozen=True)
class LiouvilleState:
    """Populations and the ground-state coherence ``rho_R + i rho_I``."""

    rho_g1g1: float
    rho_g2g2: float
    rho_R: float = 0.0
    rho_I: float = 0.0

    @property
    def rho_ee(self) -> float:
        return 1.0 - self.rho_g1g1 - self.rho_g2g2

    @property
    def coherence(self) -> complex:
        return complex(self.rho_R, self.rho_I)

    def density_matrix(self) -> np.ndarray:
        """3x3 density matrix in the basis (e, g1, g2)."""
        c = self.coherence
        return np.array([
            [self.rho_ee, 0.0, 0.0],
            [0.0, self.rho_g1g1, c],
            [0.0, c.conjugate(), self.rho_g2g2],
        ], dtype=complex)

    def as_array(self) -> np.ndarray:
        return np.array([self.rho_g1g1, self.rho_g2g2, self.rho_R, self.rho_I])

    def check(self, tol: float = PROPAGATION_TOL) -> None:
        """Raise if the state is not a valid density matrix within ``tol``."""
        _check_components(self.rho_g1g1, self.rho_g2g2, self.rho_R, self.rho_I, tol)


def _check_components(g1: float, g2: float, re: float, im: float, tol: float) -> None:
    if g1 < -tol or g2 < -tol:
        raise NotPositive("negative ground-state population")
    if g1 + g2 > 1.0 + tol:
        raise BadTrace(f"ground-state populations sum to {g1 + g2!r} > 1")
    if re * re + im * im > g1 * g2 + tol:
        raise NotPositive(f"|coherence|^2 = {re * re + im * im!r} exceeds "
                          f"rho_g1g1 * rho_g2g2 = {g1 * g2!r}")


def state_from_density(rho_g1g1: float, rho_g2g2: float,
                       coherence: complex = 0.0) -> LiouvilleState:
    """Pack density-matrix elements into a :class:`LiouvilleState`.

    Raises
    ------
    NotPositive
        If ``|coherence|^2 > rho_g1g1 * rho_g2g2 + 1e-12``.
    BadTrace
        If the ground-state populations sum to more than one.
    """
    coherence = complex(coherence)
    _check_components(rho_g1g1, rho_g2g2, coherence.real, coherence.imag, CONSTRUCTION_TOL)
    return LiouvilleState(rho_g1g1, rho_g2g2, coherence.real, coherence.imag)


MIXED_STATE = LiouvilleState(0.5, 0.5, 0.0, 0.0)
COHERENT_STATE = LiouvilleState(0.5, 0.5, 0.5, 0.0)


class Method(str, enum.Enum):
    SPECTRAL = "spectral"
    ADAPTIVE_ODE = "ode"
    ANALYTIC = "analytic"


@dataclass(frozen=True)
class Trajectory:
    """Sampled time evolution.

    ``components`` has shape ``(len(times), 4)`` with columns
    ``(rho_g1g1, rho_g2g2, rho_R, rho_I)``.
    """

    times: np.ndarray
    components: np.ndarray
    method: Method
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        comps = np.asarray(self.components, dtype=float)
        if times.ndim != 1 or comps.shape != (times.size, 4):
            raise ValueError(f"components shape {comps.shape} does not match {times.size} times")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "method", Method(self.method))

    def __len__(self) -> int:
        return self.times.size

    def __iter__(self) -> Iterator[LiouvilleState]:
        for row in self.components:
            yield LiouvilleState(*row)

    def state(self, i: int) -> LiouvilleState:
        return LiouvilleState(*self.components[i])

    @property
    def states(self) -> list[LiouvilleState]:
        return list(self)

    @property
    def rho_g1g1(self) -> np.ndarray:
        return self.components[:, 0]

    @property
    def rho_g2g2(self) -> np.ndarray:
        return self.components[:, 1]

    @property
    def rho_R(self) -> np.ndarray:
        return self.components[:, 2]

    @property
    def rho_I(self) -> np.ndarray:
        return self.components[:, 3]

    @property
    def rho_ee(self) -> np.ndarray:
        return 1.0 - self.components[:, 0] - self.components[:, 1]

    @property
    def coherence(self) -> np.ndarray:
        return self.components[:, 2] + 1j * self.components[:, 3]

    @property
    def population_difference(self) -> np.ndarray:
        """``rho_ee - rho_g1g1``, the inversion that drives coherence generation."""
        return self.rho_ee - self.rho_g1g1

    def min_density_eigenvalue(self) -> np.ndarray:
        """Smallest eigenvalue of the reconstructed 3x3 density matrix per time."""
        g1, g2 = self.components[:, 0], self.components[:, 1]
        c2 = self.components[:, 2] ** 2 + self.components[:, 3] ** 2
        lower = 0.5 * ((g1 + g2) - np.sqrt((g1 - g2) ** 2 + 4.0 * c2))
        return np.minimum(lower, self.rho_ee)

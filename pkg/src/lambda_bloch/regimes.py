"""Regime classification from the discriminant of the characteristic cubic.

Everything here is evaluated in units where gamma = 1: rates are divided by
gamma before any power is taken, so D is reported in units of gamma**6. At
gamma ~ 1e9 s^-1 the unscaled sixth powers would overflow intermediate
products long before the cancellation in D became visible.

D = B**3 + E**2 is a difference of nearly equal terms close to the critical
line. Scalar reports therefore evaluate it in exact rational arithmetic on
the (float) inputs and round once; the vectorized path used by sweeps stays
in float64, where only the sign matters.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .model import POLARIZED_ATTENUATION, DegenerateP, DriveGeometry, SystemParams

CRITICAL_RTOL = 1e-9


class Regime(str, enum.Enum):
    UNDERDAMPED = "underdamped"
    OVERDAMPED = "overdamped"
    CRITICAL = "critical"


REGIME_CODES = {Regime.OVERDAMPED: -1, Regime.CRITICAL: 0, Regime.UNDERDAMPED: 1}


@dataclass(frozen=True)
class RegimeReport:
    """Cubic invariants, discriminant and classification.

    ``A``, ``B``, ``C``, ``E`` and ``D`` are in units of gamma, gamma**2,
    gamma**3, gamma**3 and gamma**6 respectively.
    """

    A: float
    B: float
    C: float
    E: float
    D: float
    regime: Regime
    critical_slope_strong: float | None
    critical_ratio_weak: float
    gamma: float = 1.0

    @property
    def D_absolute(self) -> float:
        return self.D * self.gamma ** 6

    def to_dict(self) -> dict:
        return {
            "A": self.A, "B": self.B, "C": self.C, "E": self.E, "D": self.D,
            "units": "gamma-scaled",
            "regime": self.regime.value,
            "critical_slope_strong": self.critical_slope_strong,
            "critical_ratio_weak": self.critical_ratio_weak,
        }


def classify(D, B, E):
    """Regime code (-1, 0, +1) with the cancellation-aware tolerance band.

    Works elementwise on arrays.
    """
    D, B, E = np.asarray(D), np.asarray(B), np.asarray(E)
    band = CRITICAL_RTOL * np.maximum(np.abs(B) ** 3, E ** 2)
    return np.where(D > band, 1, np.where(D < -band, -1, 0))


def _regime_from_code(code: int) -> Regime:
    return {1: Regime.UNDERDAMPED, -1: Regime.OVERDAMPED, 0: Regime.CRITICAL}[int(code)]


def invariants_from_coefficients(a2, a1, a0):
    """A, B, C, E, D for the monic cubic ``l^3 + a2 l^2 + a1 l + a0``.

    Substituting ``l = m - A`` gives the depressed cubic ``m^3 + 3B m + 2E``.
    """
    A = a2 / 3
    B = a1 / 3 - A * A
    C = a0 / 2 + A ** 3
    E = C - 3 * A * (B + A * A) / 2
    D = B ** 3 + E * E
    return A, B, C, E, D


def cubic_invariants(matrix: np.ndarray):
    """Invariants of the characteristic polynomial of a 3x3 matrix."""
    m = np.asarray(matrix, dtype=float)
    if m.shape != (3, 3):
        raise ValueError("cubic invariants need a 3x3 matrix")
    a2 = -np.trace(m)
    a1 = (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
          + m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0]
          + m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
    a0 = -np.linalg.det(m)
    return invariants_from_coefficients(a2, a1, a0)


def scaled_invariants(rho, y, p):
    """Invariants for the symmetric isotropic generator with gamma = 1.

    Parameters
    ----------
    rho : float or ndarray
        Pumping rate over gamma (equal to nbar for isotropic pumping).
    y : float or ndarray
        Splitting over gamma.
    p : float or ndarray
    """
    rho, y, p = np.asarray(rho, float), np.asarray(y, float), np.asarray(p, float)
    a = 3.0 * rho + 2.0
    a2 = 5.0 * rho + 2.0
    a1 = y * y + rho * rho + (2.0 - p * p) * rho * a
    a0 = a * (y * y + (1.0 - p * p) * rho * rho)
    return invariants_from_coefficients(a2, a1, a0)


def scaled_invariants_polarized(rho, y):
    """Invariants for the symmetric polarized generator with gamma = 1.

    ``rho`` is the attenuated pumping rate over gamma.
    """
    rho, y = np.asarray(rho, float), np.asarray(y, float)
    a = 3.0 * rho + 2.0
    a2 = 5.0 * rho + 2.0
    a1 = 2.0 * a * rho - 2.0 * rho * rho + y * y
    a0 = a * y * y + 2.0 * rho * rho
    return invariants_from_coefficients(a2, a1, a0)


def _exact_isotropic(rho: Fraction, y: Fraction, p: Fraction):
    a = 3 * rho + 2
    a1 = y * y + rho * rho + (2 - p * p) * rho * a
    a0 = a * (y * y + (1 - p * p) * rho * rho)
    return invariants_from_coefficients(5 * rho + 2, a1, a0)


def _exact_polarized(rho: Fraction, y: Fraction):
    a = 3 * rho + 2
    return invariants_from_coefficients(5 * rho + 2, 2 * a * rho - 2 * rho * rho + y * y,
                                        a * y * y + 2 * rho * rho)


def scaled_discriminant(nbar, delta_over_gamma, p):
    """Vectorized D / gamma**6 for the symmetric isotropic system."""
    return scaled_invariants(nbar, delta_over_gamma, p)[4]


def node_invariants(nbar, delta_over_gamma, p, geometry: DriveGeometry = DriveGeometry.ISOTROPIC):
    """Gamma-scaled invariants for either geometry, vectorized over the inputs."""
    if DriveGeometry(geometry) is DriveGeometry.POLARIZED_X:
        return scaled_invariants_polarized(POLARIZED_ATTENUATION * np.asarray(nbar, float),
                                           delta_over_gamma)
    return scaled_invariants(nbar, delta_over_gamma, p)


def discriminant(params: SystemParams) -> RegimeReport:
    """Classify the dynamics of a symmetric system.

    Both geometries use closed-form characteristic-polynomial coefficients
    in gamma-scaled units.
    """
    params.require_symmetric()
    y = Fraction(params.delta_over_gamma)
    if params.drive_geometry is DriveGeometry.ISOTROPIC:
        # r/gamma is nbar by definition; use it directly rather than the rounded quotient
        inv = _exact_isotropic(Fraction(params.nbar), y, Fraction(params.p))
    else:
        inv = _exact_polarized(Fraction(POLARIZED_ATTENUATION * params.nbar), y)
    A, B, C, E, D = (float(v) for v in inv)
    regime = _regime_from_code(classify(D, B, E))
    slope = critical_slope_strong(params.p) if params.p != 0 else None
    return RegimeReport(A, B, C, E, D, regime, slope, critical_ratio_weak(params.p), params.gamma)


@dataclass(frozen=True)
class DiscriminantCoefficients:
    """Coefficients of ``2916 D / gamma**6 = sum_k d_k nbar**k``."""

    d0: float
    d1: float
    d2: float
    d3: float
    d4: float
    d5: float
    d6: float

    def as_array(self) -> np.ndarray:
        return np.array([self.d0, self.d1, self.d2, self.d3, self.d4, self.d5, self.d6])

    def evaluate(self, nbar, gamma: float = 1.0):
        """D in units of gamma**6 unless ``gamma`` is given."""
        scaled = np.polynomial.polynomial.polyval(nbar, self.as_array()) / 2916.0
        return scaled * gamma ** 6


def discriminant_coefficients(p: float, delta_over_gamma: float) -> DiscriminantCoefficients:
    """Expand the discriminant as a sextic in nbar.

    Built from ``2916 D = 4 b(n)**3 + c(n)**2`` with quadratic ``b`` and cubic
    ``c`` (gamma = 1), in exact arithmetic.
    """
    y2, p2 = Fraction(delta_over_gamma) ** 2, Fraction(p) ** 2
    b0, b1, b2 = 3 * y2 - 4, -(8 + 6 * p2), -(4 + 9 * p2)
    c0, c1 = 36 * y2 + 16, 36 * y2 + 48 + 36 * p2
    c2, c3 = 48 + 90 * p2, 16 + 54 * p2
    d = (
        4 * b0 ** 3 + c0 ** 2,
        12 * b0 ** 2 * b1 + 2 * c0 * c1,
        12 * b0 * b1 ** 2 + 12 * b0 ** 2 * b2 + c1 ** 2 + 2 * c0 * c2,
        4 * b1 ** 3 + 24 * b0 * b1 * b2 + 2 * c0 * c3 + 2 * c1 * c2,
        12 * b0 * b2 ** 2 + 12 * b1 ** 2 * b2 + c2 ** 2 + 2 * c1 * c3,
        12 * b1 * b2 ** 2 + 2 * c2 * c3,
        4 * b2 ** 3 + c3 ** 2,
    )
    # exact products, rounded once: the d_k themselves cancel strongly at small Delta
    return DiscriminantCoefficients(*(float(v) for v in d))


def depressed_cubic_pq(p: float) -> tuple[float, float]:
    """P and Q of ``z**3 + P z + Q = 0`` whose real root is ``f(p)**2``."""
    p2 = p * p
    return 16 + 60 * p2 + 27 * p2 * p2, -9 * p2 * p2 * (1 + 3 * p2)


def critical_slope_strong(p: float) -> float:
    """Slope f(p) of the strong-pumping critical line ``Delta/gamma = f(p) nbar``.

    The second Cardano term ``t2`` is negative for every p != 0, so the real
    (signed) cube root is used for both terms.

    Raises
    ------
    DegenerateP
        At p == 0, where the overdamped region vanishes.
    """
    p = float(p)
    if p == 0.0:
        raise DegenerateP("critical line undefined at p = 0")
    if abs(p) > 1.0:
        raise ValueError("p must lie in [-1, 1]")
    P, Q = depressed_cubic_pq(p)
    root = math.sqrt(Q * Q / 4.0 + P ** 3 / 27.0)
    t1, t2 = -Q / 2.0 + root, -Q / 2.0 - root
    z = float(np.cbrt(t1) + np.cbrt(t2))
    return math.sqrt(z)


def critical_ratio_weak(p: float) -> float:
    """Weak-pumping threshold on ``Delta / r``: overdamped below ``p**2 / 2``."""
    return 0.5 * float(p) ** 2


def critical_line(nbar, p: float, limit: str = "strong"):
    """Predicted critical ``Delta/gamma`` at the given nbar in either limit."""
    nbar = np.asarray(nbar, float)
    if limit == "strong":
        return critical_slope_strong(p) * nbar
    if limit == "weak":
        return critical_ratio_weak(p) * nbar
    raise ValueError(f"unknown limit {limit!r}")

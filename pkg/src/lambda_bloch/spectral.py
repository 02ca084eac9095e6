"""Eigenvalues of the generator and the lifetimes derived from them.

The closed-form roots come from Cardano's formula applied to the depressed
characteristic cubic. A dense eigensolver provides the independent answer
that every closed form is checked against.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .generator import Generator, build_generator
from .model import LiouvilleState, NoConvergence, SystemParams, WrongRegime
from .regimes import classify, cubic_invariants, discriminant

OMEGA = complex(-0.5, math.sqrt(3.0) / 2.0)
# (alpha_j, beta_j) multipliers for the three Cardano branches
CARDANO_BRANCHES = ((1.0 + 0j, 1.0 + 0j), (OMEGA.conjugate(), OMEGA), (OMEGA, OMEGA.conjugate()))

REAL_TOL = 1e-8
QUASI_STEADY_PREFACTOR = 1.34
QUASI_STEADY_MIN_P = 0.995
Q_REFERENCE_NBAR = 1e-6


@dataclass(frozen=True)
class EigenTriple:
    """Three eigenvalues under a fixed labeling.

    ``lambda1`` is the fast real population mode. When the spectrum has a
    conjugate pair, ``lambda2`` carries ``Im >= 0`` and ``lambda3`` its
    conjugate; otherwise the two remaining real roots follow in order of
    increasing ``|Re|``.
    """

    lambda1: complex
    lambda2: complex
    lambda3: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.lambda1, self.lambda2, self.lambda3], dtype=complex)

    def __iter__(self):
        return iter((self.lambda1, self.lambda2, self.lambda3))

    @property
    def has_pair(self) -> bool:
        return self.lambda2.imag != 0.0

    def to_dict(self) -> dict:
        return {f"lambda{i}": [v.real, v.imag] for i, v in enumerate(self, start=1)}


def order_roots(roots, complex_pair: bool | None = None) -> EigenTriple:
    """Apply the :class:`EigenTriple` labeling to three roots.

    ``complex_pair`` forces the structure (as decided by the discriminant);
    by default roots with ``|Im| <= 1e-8 max|lambda|`` count as real.
    """
    roots = np.asarray(roots, dtype=complex)
    scale = float(np.max(np.abs(roots))) or 1.0
    if complex_pair is None:
        complex_pair = bool(np.sum(np.abs(roots.imag) > REAL_TOL * scale) >= 2)
    if complex_pair:
        i_real = int(np.argmin(np.abs(roots.imag)))
        pair = np.delete(roots, i_real)
        upper = pair[np.argmax(pair.imag)]
        # average the pair so lambda3 is the exact conjugate of lambda2
        lam2 = complex(0.5 * (pair[0].real + pair[1].real), abs(upper.imag))
        return EigenTriple(complex(roots[i_real].real, 0.0), lam2, lam2.conjugate())
    by_size = sorted(roots.real, key=abs)
    return EigenTriple(complex(by_size[2]), complex(by_size[0]), complex(by_size[1]))


def cardano_from_invariants(A, B, E, D) -> np.ndarray:
    """Cardano roots ``-A + alpha_j B/T - beta_j T``, vectorized; shape ``(..., 3)``.

    Of the two admissible cube-root arguments ``E +- sqrt(D)`` the larger one
    is used, which avoids cancellation when ``|E| >> |B|**1.5``. A vanishing
    argument means a triple root ``-A``.
    """
    A, B, E = (np.asarray(v, dtype=complex) for v in (A, B, E))
    sq = np.sqrt(np.asarray(D, dtype=complex))
    plus, minus = E + sq, E - sq
    u = np.where(np.abs(plus) >= np.abs(minus), plus, minus)
    triple = u == 0
    T = np.where(triple, 1.0, u) ** (1.0 / 3.0)
    roots = np.stack([-A + a * B / T - b * T for a, b in CARDANO_BRANCHES], axis=-1)
    return np.where(triple[..., None], -A[..., None], roots)


def cardano_roots(matrix: np.ndarray) -> tuple[np.ndarray, int]:
    """Cardano roots of a 3x3 matrix and the discriminant regime code.

    The matrix is scaled by its largest entry before the invariants are formed.
    """
    m = np.asarray(matrix, dtype=float)
    scale = float(np.max(np.abs(m))) or 1.0
    A, B, C, E, D = cubic_invariants(m / scale)
    return cardano_from_invariants(A, B, E, D) * scale, int(classify(D, B, E))


def slow_rate_batch(roots: np.ndarray, codes: np.ndarray) -> np.ndarray:
    """``Re(lambda2)`` under the :class:`EigenTriple` labeling, vectorized.

    Underdamped nodes take the real part of the conjugate pair; the others
    take the real root of smallest magnitude.
    """
    roots = np.asarray(roots)
    upper = np.take_along_axis(roots, np.argmax(roots.imag, axis=-1)[..., None], axis=-1)[..., 0]
    lower = np.take_along_axis(roots, np.argmin(roots.imag, axis=-1)[..., None], axis=-1)[..., 0]
    pair_re = 0.5 * (upper.real + lower.real)
    re = roots.real
    smallest = np.take_along_axis(re, np.argmin(np.abs(re), axis=-1)[..., None], axis=-1)[..., 0]
    return np.where(np.asarray(codes) == 1, pair_re, smallest)


def eigenvalues_cardano(generator: Generator | np.ndarray) -> EigenTriple:
    """Closed-form eigenvalues of a 3x3 generator."""
    m = generator.a_matrix if isinstance(generator, Generator) else generator
    if np.shape(m) != (3, 3):
        raise ValueError("Cardano eigenvalues need the 3x3 reduced generator")
    roots, code = cardano_roots(m)
    structure = {1: True, -1: False}.get(code)
    return order_roots(roots, complex_pair=structure)


def eigenvalues_numeric(generator: Generator | np.ndarray):
    """Dense nonsymmetric eigensolve (LAPACK geev).

    Returns an :class:`EigenTriple` for 3x3 input and a sorted complex array
    (by real part, then imaginary part) otherwise.
    """
    m = generator.a_matrix if isinstance(generator, Generator) else np.asarray(generator, float)
    try:
        vals = scipy.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    if m.shape == (3, 3):
        return order_roots(vals)
    return np.sort_complex(vals)


def spectrum_deviation(a: EigenTriple, b: EigenTriple) -> float:
    """Normwise relative distance ``max|a_i - b_pi(i)| / max|a|`` over the best matching."""
    x, y = a.as_array(), b.as_array()
    scale = float(np.max(np.abs(x))) or 1.0
    best = min(float(np.max(np.abs(x - y[list(perm)]))) for perm in itertools.permutations(range(3)))
    return best / scale


def eigenvalues(params: SystemParams) -> EigenTriple:
    """Cardano eigenvalues of the symmetric reduced generator."""
    return eigenvalues_cardano(build_generator(params, reduced=True))


def q_function(params: SystemParams, reference_nbar: float | None = Q_REFERENCE_NBAR) -> float:
    """``Q = -Re(lambda2) / r`` from the exact eigenvalues.

    At ``nbar == 0`` the ratio is evaluated at ``reference_nbar`` instead;
    pass ``None`` to make that case an error.

    Raises
    ------
    ZeroDivisionError
        ``r == 0`` and no reference occupation.
    """
    if params.nbar == 0:
        if reference_nbar is None:
            raise ZeroDivisionError("Q is undefined at r = 0")
        params = params.with_(nbar=reference_nbar)
    lam = eigenvalues(params)
    return -lam.lambda2.real / params.r


def weak_pumping_eigenvalues(params: SystemParams) -> EigenTriple:
    """Leading weak-pumping eigenvalues ``-(3r+2gamma)`` and ``-rQ +- i Delta``."""
    lam1 = -(3.0 * params.r + 2.0 * params.gamma)
    lam2 = complex(-params.r * q_function(params), params.delta)
    return EigenTriple(complex(lam1), lam2, lam2.conjugate())


def strong_pumping_eigenvalues(params: SystemParams) -> EigenTriple:
    """Strong-pumping underdamped limit ``-(3r+2gamma)`` and ``-r +- i Delta``."""
    lam2 = complex(-params.r, params.delta)
    return EigenTriple(complex(-(3.0 * params.r + 2.0 * params.gamma)), lam2, lam2.conjugate())


def quasi_steady_rate(params: SystemParams) -> float:
    """Slow-mode rate ``0.75 (gamma/nbar)(Delta/gamma)**2`` of the overdamped p -> 1 regime."""
    return 0.75 * params.delta ** 2 / params.r


def quasi_steady_lifetime(params: SystemParams) -> float:
    """Lifetime ``1.34 r / Delta**2`` of the coherent quasi-steady state [s].

    Raises
    ------
    WrongRegime
        Unless the system is overdamped and ``p >= 0.995``.
    """
    report = discriminant(params)
    if not report.D < 0:
        raise WrongRegime(f"quasi-steady state needs D < 0, got {report.regime.value}")
    if params.p < QUASI_STEADY_MIN_P:
        raise WrongRegime(f"quasi-steady state needs p >= {QUASI_STEADY_MIN_P}, got {params.p}")
    if params.delta == 0:
        return math.inf
    return QUASI_STEADY_PREFACTOR * params.r / params.delta ** 2


@dataclass(frozen=True)
class EffectiveDecoherence:
    rate: float
    p_c_eff: float
    lifetime: float

    def to_dict(self) -> dict:
        return {"rate": self.rate, "p_c_eff": self.p_c_eff, "lifetime": self.lifetime}


def effective_decoherence_rate(params: SystemParams) -> EffectiveDecoherence:
    """Decoherence rate ``r (1 - p + Delta**2/r**2)`` of the two-contribution model.

    Valid for ``r >> gamma``; a warning is issued below ``r = 10 gamma``.
    A zero rate maps to an infinite lifetime.
    """
    r, delta, p = params.r1, params.delta, params.p
    if r < 10.0 * params.gamma1:
        warnings.warn("effective decoherence model assumes r >> gamma", RuntimeWarning, stacklevel=2)
    if r == 0:
        return EffectiveDecoherence(math.inf, -math.inf, 0.0)
    x = delta / r
    rate = r * (1.0 - p + x * x)
    return EffectiveDecoherence(rate, 1.0 - x * x, math.inf if rate == 0 else 1.0 / rate)


def quasi_steady_relation(state: LiouvilleState, params: SystemParams) -> float:
    """Residual ``rho_I + (Delta/r) rho_R``; near zero on the quasi-steady plateau."""
    return state.rho_I + params.delta / params.r1 * state.rho_R

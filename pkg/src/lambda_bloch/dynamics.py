"""Time propagation: exact spectral, adaptive ODE, and closed-form analytic.

All three return a :class:`~lambda_bloch.model.Trajectory` with the four
stored components, so any pair can be compared point by point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .generator import Generator, build_generator
from .model import (
    DriveGeometry,
    LiouvilleState,
    Method,
    NearDegenerate,
    StepFailure,
    SystemParams,
    Trajectory,
    WrongRegime,
)
from .regimes import Regime, discriminant
from .spectral import eigenvalues, q_function

DEGENERACY_RTOL = 1e-10
ODE_RTOL = 1e-10
ODE_ATOL = 1e-13
WEAK_FORM_MAX_RATIO = 1e-2
EXPLICIT_STEP_SAFETY = 5.0


def _as_times(times) -> np.ndarray:
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if t.ndim != 1 or t.size == 0:
        raise ValueError("times must be a non-empty 1-d array")
    if np.any(t < 0):
        raise ValueError("times are measured from the initial state and must be >= 0")
    return t


def _initial_vector(generator: Generator, x0) -> np.ndarray:
    if isinstance(x0, LiouvilleState):
        return generator.to_vector(x0)
    x = np.asarray(x0, dtype=float)
    if x.shape != (generator.dimension,):
        raise ValueError(f"initial vector must have shape ({generator.dimension},)")
    return x


def propagate_spectral(generator: Generator, x0, times) -> Trajectory:
    """Exact solution ``x(t) = e^{At} x0 + phi(A, t) d`` by eigendecomposition.

    ``phi(lambda, t) = (e^{lambda t} - 1)/lambda`` is evaluated with ``expm1``
    so that slow modes keep full relative accuracy; ``phi(0, t) = t``.

    Raises
    ------
    NearDegenerate
        Two eigenvalues closer than ``1e-10 ||A||``; use :func:`propagate_ode`.
    """
    t = _as_times(times)
    x = _initial_vector(generator, x0)
    A = generator.a_matrix
    lam, V = np.linalg.eig(A)
    norm = np.linalg.norm(A, 2) or 1.0
    gaps = [abs(a - b) for a, b in itertools.combinations(lam, 2)]
    if gaps and min(gaps) <= DEGENERACY_RTOL * norm:
        raise NearDegenerate(f"eigenvalue gap {min(gaps):.3e} below {DEGENERACY_RTOL:g}*||A||")
    c0 = np.linalg.solve(V, x.astype(complex))
    cd = np.linalg.solve(V, generator.d_vector.astype(complex))
    lt = np.outer(t, lam)
    zero = lam == 0
    safe = np.where(zero, 1.0, lam)
    phi = np.where(zero, t[:, None], np.expm1(lt) / safe)
    modes = np.exp(lt) * c0 + phi * cd
    xs = (modes @ V.T).real
    xs[t == 0] = x
    return Trajectory(t, generator.expand(xs), Method.SPECTRAL)


def propagate_ode(generator: Generator, x0, times, rtol: float = ODE_RTOL,
                  atol: float = ODE_ATOL, integrator: str = "DOP853") -> Trajectory:
    """Adaptive integration of ``x' = A x + d``.

    The default is the embedded 8th-order Dormand-Prince pair. Long runs far
    past the fast population mode can pass ``integrator="LSODA"``, which uses
    the constant Jacobian ``A`` and is not step-limited by stiffness.

    Explicit integrators are capped at ``max_step = 5 / rho(A)``. Without the
    cap DOP853 rides the edge of its stability region on the fast population
    mode, where its error estimate is unreliable (drifts of 1e-6 seen).

    Raises
    ------
    StepFailure
        The integrator reported failure (typically step-size underflow).
    """
    t = _as_times(times)
    x = _initial_vector(generator, x0)
    A, d = generator.a_matrix, generator.d_vector
    if t[-1] == 0:
        xs = np.tile(x, (t.size, 1))
    else:
        if integrator in ("RK45", "RK23", "DOP853"):
            extra = {"max_step": EXPLICIT_STEP_SAFETY / max(np.max(np.abs(np.linalg.eigvals(A))), 1e-300)}
        else:
            extra = {"jac": lambda _t, _y: A}
        sol = solve_ivp(lambda _t, y: A @ y + d, (0.0, t[-1]), x, method=integrator,
                        t_eval=t, rtol=rtol, atol=atol, **extra)
        if sol.status != 0:
            raise StepFailure(sol.message)
        xs = sol.y.T
    return Trajectory(t, generator.expand(xs), Method.ADAPTIVE_ODE,
                      meta={"rtol": rtol, "atol": atol, "integrator": integrator})


def propagate(generator: Generator, x0, times, method: str | Method = "auto") -> Trajectory:
    """Dispatch by method name; ``auto`` tries spectral and falls back to ODE."""
    if method == "auto":
        try:
            return propagate_spectral(generator, x0, times)
        except NearDegenerate:
            return propagate_ode(generator, x0, times)
    method = Method(method)
    if method is Method.SPECTRAL:
        return propagate_spectral(generator, x0, times)
    if method is Method.ADAPTIVE_ODE:
        return propagate_ode(generator, x0, times)
    raise ValueError("analytic propagation needs params; use analytic_underdamped")


def _require_underdamped(params: SystemParams) -> None:
    if params.drive_geometry is not DriveGeometry.ISOTROPIC:
        raise WrongRegime("closed-form solutions cover isotropic pumping only")
    params.require_symmetric()
    if discriminant(params).regime is Regime.OVERDAMPED:
        raise WrongRegime("closed-form solutions need the underdamped regime (D >= 0)")


def _rates(params: SystemParams, form: str) -> tuple[float, float]:
    """(pump-following amplitude rate, fast population rate) for the chosen form."""
    r, g = params.r, params.gamma
    if form == "general":
        return r + g, 3.0 * r + 2.0 * g
    if form == "weak":
        return g, 2.0 * g
    raise ValueError(f"unknown form {form!r}")


def analytic_form(params: SystemParams) -> str:
    """Form used for display: the simplified weak-pumping one when ``r/gamma < 1e-2``."""
    return "weak" if params.r < WEAK_FORM_MAX_RATIO * params.gamma else "general"


def population_underdamped(params: SystemParams, times, form: str = "general") -> np.ndarray:
    """``rho_g1g1(t)`` from the mixed start ``rho_gigi(0) = 1/2``.

    ``form="general"`` keeps ``(r+gamma)`` and ``(3r+2gamma)`` throughout;
    ``"weak"`` uses the exponent ``2 gamma`` of the weak-pumping limit.
    """
    _require_underdamped(params)
    t = _as_times(times)
    r, g = params.r, params.gamma
    fast = _rates(params, form)[1]
    a = 3.0 * r + 2.0 * g
    return (r + g + 0.5 * r * np.exp(-fast * t)) / a


def analytic_underdamped(params: SystemParams, rho0_coherence: complex = 0.0, times=None,
                         form: str = "general", q: float | None = None) -> Trajectory:
    """Closed-form underdamped coherence and populations.

    The oscillatory part decays as ``exp(-r Q t)`` with ``Q`` from the exact
    eigenvalues; the pump-following part decays with the fast population rate.

    Parameters
    ----------
    params : SystemParams
        Symmetric, isotropic, not overdamped.
    rho0_coherence : complex
        Initial ``rho_g1g2``; populations start at 1/2 each.
    times : array_like
    form : {"general", "weak"}
    q : float, optional
        Override the exponent factor (defaults to :func:`q_function`).

    Raises
    ------
    WrongRegime
        Overdamped or non-isotropic parameters.
    """
    _require_underdamped(params)
    t = _as_times(times)
    r, delta, p = params.r, params.delta, params.p
    q = q_function(params) if q is None else q
    b, fast = _rates(params, form)
    c0 = complex(rho0_coherence)
    R0, I0 = c0.real, c0.imag
    cos, sin = np.cos(delta * t), np.sin(delta * t)
    slow = np.exp(-r * q * t)
    quick = np.exp(-fast * t)
    K = p * r / (2.0 * (4.0 * b * b + delta * delta))
    rho_R = (R0 * cos + I0 * sin) * slow + K * (2 * b * quick - (2 * b * cos + delta * sin) * slow)
    rho_I = (-R0 * sin + I0 * cos) * slow + K * (delta * quick + (2 * b * sin - delta * cos) * slow)
    pop = population_underdamped(params, t, form)
    comps = np.column_stack([pop, pop, rho_R, rho_I])
    return Trajectory(t, comps, Method.ANALYTIC, meta={"Q": q, "form": form})


def default_time_grid(params: SystemParams, points: int = 2000) -> np.ndarray:
    """Log-spaced grid resolving both the fastest and the slowest mode.

    Runs from ``1e-3 / max(r, gamma)`` to ``5 / min(rQ, |Re lambda2|)``.
    """
    r, g = params.r1, params.gamma1
    start = 1e-3 / max(r, g)
    slow = [abs(eigenvalues(params).lambda2.real)] if params.is_symmetric() else []
    if r > 0 and params.is_symmetric():
        slow.append(r * q_function(params))
    slow = [s for s in slow if s > 0]
    if not slow:
        slow = [min(filter(None, (r, g)))]
    stop = 5.0 / min(slow)
    return np.geomspace(start, stop, points)


@dataclass
class MethodComparison:
    """Pointwise deviations between propagation methods.

    ``deviations[(a, b)]`` is the per-time max abs component difference.
    """

    times: np.ndarray
    deviations: dict = field(default_factory=dict)

    @property
    def max_deviation(self) -> float:
        return max((float(np.max(v)) for v in self.deviations.values()), default=0.0)

    @property
    def mean_deviation(self) -> float:
        if not self.deviations:
            return 0.0
        return float(np.mean([np.mean(v) for v in self.deviations.values()]))

    def summary(self) -> dict:
        return {
            "pairs": {f"{a}-{b}": {"max": float(np.max(v)), "mean": float(np.mean(v))}
                      for (a, b), v in self.deviations.items()},
            "max": self.max_deviation,
            "mean": self.mean_deviation,
        }


def run_method(params: SystemParams, x0: LiouvilleState, times, method: str | Method,
               generator: Generator | None = None) -> Trajectory:
    """Propagate ``x0`` by name; the generator reduction follows the state's symmetry."""
    method = method if method == "auto" else Method(method)
    if method is Method.ANALYTIC:
        if abs(x0.rho_g1g1 - 0.5) > 1e-12 or abs(x0.rho_g2g2 - 0.5) > 1e-12:
            raise WrongRegime("closed-form solutions assume rho_gigi(0) = 1/2")
        return analytic_underdamped(params, x0.coherence, times)
    if generator is None:
        symmetric_state = abs(x0.rho_g1g1 - x0.rho_g2g2) <= 1e-12
        generator = build_generator(params, reduced=params.is_symmetric() and symmetric_state)
    return propagate(generator, x0, times, method)


def compare_methods(params: SystemParams, x0: LiouvilleState, times,
                    methods=(Method.SPECTRAL, Method.ADAPTIVE_ODE),
                    precomputed: dict | None = None) -> MethodComparison:
    """Run each method on the same grid and tabulate pairwise deviations.

    The analytic method's regime check runs before anything is propagated.
    ``precomputed`` maps methods to trajectories already run on ``times``.
    """
    methods = [Method(m) for m in methods]
    if Method.ANALYTIC in methods:
        _require_underdamped(params)
    t = _as_times(times)
    done = {Method(k): v for k, v in (precomputed or {}).items()}
    runs = {m: done[m] if m in done else run_method(params, x0, t, m) for m in methods}
    out = MethodComparison(t)
    for a, b in itertools.combinations(methods, 2):
        out.deviations[(a.value, b.value)] = np.max(np.abs(runs[a].components - runs[b].components), axis=1)
    return out

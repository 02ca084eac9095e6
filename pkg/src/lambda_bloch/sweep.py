"""Parallel regime maps, critical-line fits and lifetime surfaces.

Work is split by grid rows. Each row is evaluated as one vectorized call with
the same array shape whatever the worker count, so the output is bitwise
independent of how rows are distributed.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import DriveGeometry, NoBoundary
from .regimes import classify, node_invariants
from .spectral import cardano_from_invariants, slow_rate_batch

AXIS_NAMES = ("nbar", "delta_over_gamma", "p")
WORKERS_ENV = "LAMBDA_BLOCH_WORKERS"
BISECTION_STEPS = 40


@dataclass(frozen=True)
class Axis:
    """One sampled parameter axis.

    ``count == 1`` with ``min == max`` is accepted as a single-node axis.
    """

    name: str
    min: float
    max: float
    count: int
    scale: str = "log"

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValueError(f"axis name must be one of {AXIS_NAMES}, got {self.name!r}")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"axis scale must be linear or log, got {self.scale!r}")
        if not (math.isfinite(self.min) and math.isfinite(self.max)):
            raise ValueError(f"{self.name}: axis bounds must be finite")
        if self.scale == "log" and self.min <= 0:
            raise ValueError(f"{self.name}: log axis needs min > 0")
        if self.count == 1:
            if self.min != self.max:
                raise ValueError(f"{self.name}: a single-node axis needs min == max")
        elif self.count < 2 or not self.min < self.max:
            raise ValueError(f"{self.name}: need count >= 2 and min < max")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.min)])
        if self.scale == "log":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)


@dataclass(frozen=True)
class GridSpec:
    """Two sampled axes plus fixed values for the remaining parameters.

    ``fixed`` may hold ``nbar``, ``delta_over_gamma``, ``p``, ``gamma`` and
    ``geometry``; ``gamma`` only sets the units of lifetimes.
    """

    axis1: Axis
    axis2: Axis
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.axis1.name == self.axis2.name:
            raise ValueError("the two axes must sweep different parameters")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.axis1.count, self.axis2.count)

    @property
    def gamma(self) -> float:
        return float(self.fixed.get("gamma", 1.0))

    @property
    def geometry(self) -> DriveGeometry:
        return DriveGeometry(self.fixed.get("geometry", DriveGeometry.ISOTROPIC))

    def row_arguments(self, i: int) -> dict:
        """Parameter arrays (length ``axis2.count``) for grid row ``i``."""
        args = {
            "nbar": self.fixed.get("nbar", 0.0),
            "delta_over_gamma": self.fixed.get("delta_over_gamma", 0.0),
            "p": self.fixed.get("p", 0.0),
        }
        args[self.axis1.name] = self.axis1.values()[i]
        args[self.axis2.name] = self.axis2.values()
        return {k: np.broadcast_to(np.asarray(v, float), (self.axis2.count,)) for k, v in args.items()}

    def to_dict(self) -> dict:
        fixed = {k: (v.value if isinstance(v, DriveGeometry) else v) for k, v in self.fixed.items()}
        axes = [{"name": a.name, "min": a.min, "max": a.max, "count": a.count, "scale": a.scale}
                for a in (self.axis1, self.axis2)]
        return {"axis1": axes[0], "axis2": axes[1], "fixed": fixed}


@dataclass
class RegimeMap:
    """Discriminant (gamma**6 units) and regime codes (-1, 0, +1) per node.

    ``re_lambda2`` is in 1/s when requested.
    """

    grid: GridSpec
    discriminant: np.ndarray
    regime: np.ndarray
    re_lambda2: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.discriminant.shape

    def counts(self) -> dict:
        return {name: int(np.sum(self.regime == code))
                for name, code in (("overdamped", -1), ("critical", 0), ("underdamped", 1))}


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        workers = int(env) if env else (os.cpu_count() or 1)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    return workers


def _evaluate_row(grid: GridSpec, i: int, with_lifetimes: bool):
    args = grid.row_arguments(i)
    A, B, C, E, D = node_invariants(args["nbar"], args["delta_over_gamma"], args["p"], grid.geometry)
    codes = classify(D, B, E)
    re2 = None
    if with_lifetimes:
        roots = cardano_from_invariants(A, B, E, D)
        re2 = slow_rate_batch(roots, codes) * grid.gamma
    return D, codes, re2


def _run_rows(grid: GridSpec, workers: int | None, with_lifetimes: bool):
    n1, n2 = grid.shape
    D = np.empty((n1, n2))
    codes = np.empty((n1, n2), dtype=np.int8)
    re2 = np.empty((n1, n2)) if with_lifetimes else None
    workers = min(resolve_workers(workers), n1)

    def work(rows):
        for i in rows:
            d, c, r = _evaluate_row(grid, i, with_lifetimes)
            D[i], codes[i] = d, c
            if re2 is not None:
                re2[i] = r

    chunks = [range(k, n1, workers) for k in range(workers)]
    if workers == 1:
        work(chunks[0])
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for fut in [pool.submit(work, rows) for rows in chunks]:
                fut.result()
    return D, codes, re2


def map_regimes(grid: GridSpec, workers: int | None = None, with_lifetimes: bool = False) -> RegimeMap:
    """Discriminant and classification at every grid node."""
    D, codes, re2 = _run_rows(grid, workers, with_lifetimes)
    return RegimeMap(grid, D, codes, re2)


def lifetime_surface(grid: GridSpec, workers: int | None = None) -> np.ndarray:
    """``-1/Re(lambda2)`` at every node, in seconds for the grid's gamma."""
    _, _, re2 = _run_rows(grid, workers, True)
    with np.errstate(divide="ignore"):
        return -1.0 / re2


@dataclass(frozen=True)
class CriticalLineFit:
    """Least-squares fit of the refined boundary ``y(x)``.

    ``slope`` is the proportionality constant ``y/x`` (geometric mean over
    the points for log-log grids); ``exponent`` and ``intercept`` come from
    the straight-line fit in the grid's coordinates, and ``residual`` is the
    RMS misfit of that line.
    """

    slope: float
    intercept: float
    exponent: float
    residual: float
    x: np.ndarray
    y: np.ndarray
    x_name: str
    y_name: str

    def to_dict(self) -> dict:
        return {
            "slope": self.slope, "intercept": self.intercept, "exponent": self.exponent,
            "residual": self.residual, "x_name": self.x_name, "y_name": self.y_name,
            "points": [[float(a), float(b)] for a, b in zip(self.x, self.y)],
        }


def _orientation(grid: GridSpec) -> tuple[Axis, Axis, bool]:
    """(x axis, y axis searched for the boundary, whether y is axis1)."""
    if grid.axis1.name == "delta_over_gamma":
        return grid.axis2, grid.axis1, True
    return grid.axis1, grid.axis2, False


def _scaled_D(grid: GridSpec, x_axis: Axis, y_axis: Axis, x: float, y: float) -> float:
    args = {"nbar": grid.fixed.get("nbar", 0.0), "delta_over_gamma": grid.fixed.get("delta_over_gamma", 0.0),
            "p": grid.fixed.get("p", 0.0)}
    args[x_axis.name] = x
    args[y_axis.name] = y
    return float(node_invariants(args["nbar"], args["delta_over_gamma"], args["p"], grid.geometry)[4])


def _bisect(f, lo: float, hi: float, log: bool, steps: int = BISECTION_STEPS) -> float:
    flo = np.sign(f(lo))
    for _ in range(steps):
        mid = math.sqrt(lo * hi) if log else 0.5 * (lo + hi)
        if np.sign(f(mid)) == flo:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi) if log else 0.5 * (lo + hi)


def boundary_points(rmap: RegimeMap) -> tuple[np.ndarray, np.ndarray]:
    """Bisection-refined zero of D along the searched axis, one per column.

    Columns without a sign change are skipped; where several occur the last
    (largest y) is kept.
    """
    grid = rmap.grid
    x_axis, y_axis, y_is_axis1 = _orientation(grid)
    xs, ys = x_axis.values(), y_axis.values()
    D = rmap.discriminant.T if y_is_axis1 else rmap.discriminant
    sign = np.sign(D)
    out_x, out_y = [], []
    for j, x in enumerate(xs):
        col = sign[j]
        changes = np.nonzero(col[:-1] * col[1:] < 0)[0]
        if changes.size == 0:
            continue
        k = changes[-1]
        y = _bisect(lambda v: _scaled_D(grid, x_axis, y_axis, x, v), ys[k], ys[k + 1],
                    y_axis.scale == "log")
        out_x.append(x)
        out_y.append(y)
    return np.array(out_x), np.array(out_y)


def fit_critical_line(rmap: RegimeMap) -> CriticalLineFit:
    """Fit the regime boundary of a map.

    Raises
    ------
    NoBoundary
        The map holds a single regime, or fewer than two boundary points.
    """
    x_axis, y_axis, _ = _orientation(rmap.grid)
    x, y = boundary_points(rmap)
    if x.size < 2:
        raise NoBoundary(f"found {x.size} boundary point(s); the map is single-regime")
    loglog = x_axis.scale == "log" and y_axis.scale == "log"
    if loglog:
        lx, ly = np.log(x), np.log(y)
        exponent, intercept = np.polyfit(lx, ly, 1)
        residual = float(np.sqrt(np.mean((ly - (exponent * lx + intercept)) ** 2)))
        slope = float(np.exp(np.mean(ly - lx)))
    else:
        slope, intercept = np.polyfit(x, y, 1)
        exponent = 1.0
        residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return CriticalLineFit(float(slope), float(intercept), float(exponent), residual,
                           x, y, x_axis.name, y_axis.name)


def power_law_fit(x, y) -> tuple[float, float]:
    """(exponent, prefactor) of ``|y| = prefactor * x**exponent`` by log-log least squares."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.abs(np.asarray(y, float)))
    exponent, intercept = np.polyfit(lx, ly, 1)
    return float(exponent), float(np.exp(intercept))

"""Command-line front end.

Parameters resolve in three layers: preset, then ``--config`` file (flat
``key = value`` lines), then explicit flags. Output is deterministic: the
same resolved configuration always produces byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import compare_methods, default_time_grid, propagate_ode, run_method
from .generator import build_generator
from .model import (
    COHERENT_STATE,
    MIXED_STATE,
    Asymmetric,
    BadTrace,
    DriveGeometry,
    LiouvilleState,
    Method,
    NearDegenerate,
    NoBoundary,
    NoConvergence,
    NonPhysical,
    NotPositive,
    SingularGenerator,
    StepFailure,
    SystemParams,
    WrongRegime,
    state_from_density,
    validate_params,
)
from .observables import (
    entropy_series,
    steady_state,
    steady_state_numeric,
    steady_state_thermal,
    thermal_deviation,
)
from .regimes import discriminant
from .spectral import (
    effective_decoherence_rate,
    eigenvalues,
    eigenvalues_cardano,
    eigenvalues_numeric,
    q_function,
    quasi_steady_lifetime,
)
from .sweep import Axis, GridSpec, fit_critical_line, lifetime_surface, map_regimes, power_law_fit

SCHEMA_VERSION = "lambda-bloch/1"
EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 2, 3

VALIDATION_ERRORS = (NonPhysical, NotPositive, BadTrace, Asymmetric, WrongRegime, ValueError, KeyError)
RUNTIME_ERRORS = (StepFailure, NearDegenerate, SingularGenerator, NoConvergence, ArithmeticError,
                  RuntimeError, OSError)

CSV_COLUMNS = ("t", "rho_g1g1", "rho_g2g2", "rho_ee", "rho_R", "rho_I", "abs_coherence", "entropy")

PRESETS = {
    "fig1b": {
        "p": 1.0,
        "axis1": "nbar:1e2:1e4:128:log", "axis2": "delta_over_gamma:1:1e4:256:log",
    },
    "fig1c": {
        "gamma": 1e9, "nbar": 1e-3, "delta_over_gamma": 1e-2, "p": 1.0,
        "initial": "mixed", "t_max_inv_r": 3.0, "points": 3001,
    },
    "fig1d": {
        "gamma": 1e9, "nbar": 1e-3, "delta_over_gamma": 2e-2, "p": 1.0,
        "initial": "coherent", "t_max_inv_r": 5.0, "points": 3001,
    },
    "fig2": {
        "gamma": 1e9, "nbar": 1e3, "delta_over_gamma": 10.0, "p": 1.0,
        "initial": "mixed", "points": 2000,
    },
    "fig3b": {
        "gamma": 1e8, "nbar": 1e-3, "delta_over_gamma": 1e-2, "geometry": "polarized",
        "initial": "mixed", "points": 2000,
    },
}

PARAM_KEYS = ("gamma", "gamma1", "gamma2", "nbar", "delta", "delta_over_gamma", "p", "geometry")
FLOAT_KEYS = {"gamma", "gamma1", "gamma2", "nbar", "delta", "delta_over_gamma", "p", "t_max",
              "t_max_inv_r", "rho_g1g1", "rho_g2g2", "coherence_re", "coherence_im"}
INT_KEYS = {"points", "workers"}


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment, dashes equal underscores."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _coerce(cfg: dict) -> dict:
    out = {}
    for key, value in cfg.items():
        if value is None:
            continue
        if key in FLOAT_KEYS:
            value = float(value)
        elif key in INT_KEYS:
            value = int(value)
        out[key] = value
    return out


def resolve_config(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if getattr(args, "preset", None):
        cfg.update(PRESETS[args.preset])
    if getattr(args, "config", None):
        cfg.update(read_config(args.config))
    flags = {k: v for k, v in vars(args).items()
             if v is not None and k not in ("command", "preset", "config", "handler")}
    if "delta" in flags:
        cfg.pop("delta_over_gamma", None)
    if "delta_over_gamma" in flags:
        cfg.pop("delta", None)
    if "t_max" in flags:
        cfg.pop("t_max_inv_r", None)
    cfg.update(flags)
    return _coerce(cfg)


def params_from_config(cfg: dict) -> SystemParams:
    raw = {k: cfg[k] for k in PARAM_KEYS if k in cfg}
    return validate_params(raw)


def initial_state(cfg: dict) -> LiouvilleState:
    explicit = [k for k in ("rho_g1g1", "rho_g2g2", "coherence_re", "coherence_im") if k in cfg]
    if explicit:
        g1 = cfg.get("rho_g1g1", 0.5)
        g2 = cfg.get("rho_g2g2", g1)
        return state_from_density(g1, g2, complex(cfg.get("coherence_re", 0.0), cfg.get("coherence_im", 0.0)))
    name = cfg.get("initial", "mixed")
    if name == "mixed":
        return MIXED_STATE
    if name == "coherent":
        return COHERENT_STATE
    raise ValueError(f"initial: unknown state {name!r} (mixed|coherent)")


def time_grid(cfg: dict, params: SystemParams) -> np.ndarray:
    points = cfg.get("points", 2000)
    if points < 2:
        raise ValueError("points: need at least 2 samples")
    t_max = cfg.get("t_max")
    if t_max is None and "t_max_inv_r" in cfg:
        t_max = cfg["t_max_inv_r"] / params.r1
    if t_max is not None:
        if not t_max > 0:
            raise ValueError("t_max: must be positive")
        return np.linspace(0.0, t_max, points)
    return np.concatenate([[0.0], default_time_grid(params, points - 1)])


def _time_scale(unit: str, params: SystemParams) -> float:
    if unit == "s":
        return 1.0
    if unit == "inv_r":
        return params.r1
    if unit == "inv_gamma":
        return params.gamma1
    raise ValueError(f"time_unit: unknown unit {unit!r}")


def _clean(value):
    """JSON-safe view: numpy scalars to floats, non-finite floats to strings."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, complex):
        return [_clean(value.real), _clean(value.imag)]
    return value


def dump_json(record: dict, path: str | None, stream=None) -> str:
    record = dict(record)
    record["schema"] = SCHEMA_VERSION
    record["version"] = __version__
    text = json.dumps(_clean(record), sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        (stream or sys.stdout).write(text)
    return text


def write_matrix(target, matrix: np.ndarray) -> None:
    """Write a 2-d array as CSV to a path or an open text stream."""
    matrix = np.atleast_2d(matrix)
    if isinstance(target, str):
        with open(target, "w", newline="\n") as fh:
            np.savetxt(fh, matrix, fmt="%.17g", delimiter=",")
    else:
        np.savetxt(target, matrix, fmt="%.17g", delimiter=",")


def _state_dict(state: LiouvilleState) -> dict:
    return {"rho_g1g1": state.rho_g1g1, "rho_g2g2": state.rho_g2g2, "rho_ee": state.rho_ee,
            "rho_R": state.rho_R, "rho_I": state.rho_I, "abs_coherence": abs(state.coherence)}


def _regime_record(params: SystemParams) -> dict | None:
    if not params.is_symmetric():
        return None
    return discriminant(params).to_dict()


def _eigen_record(params: SystemParams) -> dict:
    rec: dict = {}
    if params.is_symmetric():
        gen = build_generator(params, reduced=True)
        rec["cardano"] = eigenvalues_cardano(gen).to_dict()
        rec["numeric"] = eigenvalues_numeric(gen).to_dict()
    full = eigenvalues_numeric(build_generator(params, reduced=False))
    rec["numeric_full"] = [[v.real, v.imag] for v in full]
    return rec


def _output_paths(out: str | None, suffix: str = "") -> tuple[str | None, str | None]:
    if not out:
        return None, None
    base = out[:-4] if out.endswith(".csv") else out
    return f"{base}{suffix}.csv", f"{base}.json"


# -- subcommands -------------------------------------------------------------

def cmd_simulate(cfg: dict) -> int:
    params = params_from_config(cfg)
    x0 = initial_state(cfg)
    times = time_grid(cfg, params)
    methods = [m.strip() for m in str(cfg.get("method", "auto")).split(",") if m.strip()]
    primary_traj = run_method(params, x0, times, methods[0])
    resolved = [primary_traj.method.value] + [Method(m).value for m in methods[1:]]
    diag = None
    if len(resolved) > 1:
        diag = compare_methods(params, x0, times, [Method(m) for m in resolved],
                               precomputed={primary_traj.method: primary_traj}).summary()

    scale = _time_scale(cfg.get("time_unit", "s"), params)
    S = entropy_series(primary_traj)
    table = np.column_stack([
        primary_traj.times * scale, primary_traj.rho_g1g1, primary_traj.rho_g2g2, primary_traj.rho_ee,
        primary_traj.rho_R, primary_traj.rho_I, np.abs(primary_traj.coherence), S,
    ])
    csv_path, json_path = _output_paths(cfg.get("out"))
    header = ",".join(CSV_COLUMNS)
    if csv_path:
        with open(csv_path, "w", newline="\n") as fh:
            np.savetxt(fh, table, fmt="%.17g", delimiter=",", header=header, comments="")
    else:
        np.savetxt(sys.stdout, table, fmt="%.17g", delimiter=",", header=header, comments="")
    record = {
        "command": "simulate",
        "params": params.to_dict(),
        "initial_state": _state_dict(x0),
        "methods": resolved,
        "time_unit": cfg.get("time_unit", "s"),
        "points": int(times.size),
        "t_max": float(times[-1]),
        "regime": _regime_record(params),
        "eigenvalues": _eigen_record(params),
        "diagnostics": diag,
        "deterministic": True,
    }
    if json_path:
        dump_json(record, json_path)
    return EXIT_OK


def parse_axis(spec: str) -> Axis:
    """``name:min:max:count[:scale]``."""
    parts = spec.split(":")
    if len(parts) not in (4, 5):
        raise ValueError(f"axis: expected name:min:max:count[:scale], got {spec!r}")
    scale = parts[4] if len(parts) == 5 else "log"
    return Axis(parts[0], float(parts[1]), float(parts[2]), int(parts[3]), scale)


def grid_from_config(cfg: dict) -> GridSpec:
    if "axis1" not in cfg or "axis2" not in cfg:
        raise ValueError("axis1/axis2: both grid axes are required")
    a1, a2 = parse_axis(cfg["axis1"]), parse_axis(cfg["axis2"])
    fixed = {k: cfg[k] for k in ("nbar", "delta_over_gamma", "p", "gamma") if k in cfg}
    geometry = DriveGeometry(cfg.get("geometry", DriveGeometry.ISOTROPIC.value))
    fixed["geometry"] = geometry.value
    # validate the fixed values through the same checks as single runs
    probe = {"gamma": fixed.get("gamma", 1.0), "nbar": fixed.get("nbar", 0.0),
             "delta_over_gamma": fixed.get("delta_over_gamma", 0.0), "geometry": geometry.value}
    if geometry is DriveGeometry.ISOTROPIC:
        probe["p"] = fixed.get("p", 0.0)
    validate_params(probe)
    return GridSpec(a1, a2, fixed)


def cmd_regimes(cfg: dict) -> int:
    grid = grid_from_config(cfg)
    rmap = map_regimes(grid, workers=cfg.get("workers"))
    try:
        fit = fit_critical_line(rmap).to_dict()
        fit_error = None
    except NoBoundary as exc:
        fit, fit_error = None, str(exc)
    csv_path, json_path = _output_paths(cfg.get("out"))
    if csv_path:
        write_matrix(csv_path, rmap.discriminant)
        write_matrix(csv_path[:-4] + "_regime.csv", rmap.regime)
    else:
        write_matrix(sys.stdout, rmap.discriminant)
    record = {
        "command": "regimes",
        "grid": grid.to_dict(),
        "axis1_values": grid.axis1.values(),
        "axis2_values": grid.axis2.values(),
        "discriminant_units": "gamma^6",
        "counts": rmap.counts(),
        "critical_line": fit,
        "critical_line_error": fit_error,
        "deterministic": True,
    }
    dump_json(record, json_path, stream=sys.stderr)
    return EXIT_OK


def cmd_sweep_lifetimes(cfg: dict) -> int:
    grid = grid_from_config(cfg)
    tau = lifetime_surface(grid, workers=cfg.get("workers"))
    rows = []
    if grid.axis2.count > 1 and grid.axis2.scale == "log":
        for i, x in enumerate(grid.axis1.values()):
            exponent, prefactor = power_law_fit(grid.axis2.values(), tau[i])
            rows.append({grid.axis1.name: x, "exponent": exponent, "prefactor": prefactor})
    csv_path, json_path = _output_paths(cfg.get("out"))
    if csv_path:
        write_matrix(csv_path, tau)
    else:
        write_matrix(sys.stdout, tau)
    record = {
        "command": "sweep-lifetimes",
        "grid": grid.to_dict(),
        "axis1_values": grid.axis1.values(),
        "axis2_values": grid.axis2.values(),
        "lifetime_units": "s" if "gamma" in grid.fixed else "1/gamma",
        "row_power_laws": rows,
        "deterministic": True,
    }
    dump_json(record, json_path, stream=sys.stderr)
    return EXIT_OK


def cmd_eigen(cfg: dict) -> int:
    params = params_from_config(cfg)
    record: dict = {"command": "eigen", "params": params.to_dict(), "eigenvalues": _eigen_record(params)}
    record["regime"] = _regime_record(params)
    if params.is_symmetric():
        record["Q"] = q_function(params)
        try:
            record["tau_c"] = quasi_steady_lifetime(params)
        except WrongRegime as exc:
            record["tau_c"] = None
            record["tau_c_note"] = str(exc)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        eff = effective_decoherence_rate(params)
    record["effective_decoherence"] = eff.to_dict()
    record["effective_decoherence"]["strong_pumping"] = params.r1 >= 10 * params.gamma1
    dump_json(record, _output_paths(cfg.get("out"))[1])
    return EXIT_OK


def cmd_steady(cfg: dict) -> int:
    params = params_from_config(cfg)
    params.require_symmetric()
    gen = build_generator(params)
    analytic = steady_state(params)
    numeric = steady_state_numeric(gen)
    slowest = min(abs(v.real) for v in eigenvalues(params))
    if slowest == 0:
        raise SingularGenerator("zero mode: no unique long-time state")
    t_end = 40.0 / slowest
    integrated = propagate_ode(gen, MIXED_STATE, [t_end], integrator="LSODA").state(0)
    record = {
        "command": "steady",
        "params": params.to_dict(),
        "analytic": _state_dict(analytic),
        "thermal": _state_dict(steady_state_thermal(params)),
        "fixed_point": _state_dict(numeric),
        "integrated": _state_dict(integrated),
        "integration_time": t_end,
        "cross_check": {
            "analytic_vs_fixed_point": float(np.max(np.abs(analytic.as_array() - numeric.as_array()))),
            "analytic_vs_integrated": float(np.max(np.abs(analytic.as_array() - integrated.as_array()))),
        },
    }
    if params.drive_geometry is DriveGeometry.POLARIZED_X:
        record["thermal_deviation"] = thermal_deviation(params).to_dict()
    dump_json(record, _output_paths(cfg.get("out"))[1])
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def _add_param_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("system parameters")
    g.add_argument("--gamma", type=float, help="decay rate gamma (gamma1) [1/s]")
    g.add_argument("--gamma2", type=float, help="second decay rate for asymmetric systems [1/s]")
    g.add_argument("--nbar", type=float, help="mean thermal occupation number")
    d = g.add_mutually_exclusive_group()
    d.add_argument("--delta", type=float, help="ground-state splitting [rad/s]")
    d.add_argument("--delta-over-gamma", dest="delta_over_gamma", type=float, help="splitting over gamma")
    g.add_argument("--p", type=float, help="transition dipole alignment factor")
    g.add_argument("--geometry", choices=[g.value for g in DriveGeometry], help="pumping geometry")


def _add_common(p: argparse.ArgumentParser, presets: bool = True) -> None:
    if presets:
        p.add_argument("--preset", choices=sorted(PRESETS), help="figure parameter preset")
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--out", help="output path prefix (.csv / .json)")
    p.add_argument("--seedless", action="store_true", default=None,
                   help="deterministic mode (the pipeline uses no randomness; accepted for scripts)")


def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--axis1", help="name:min:max:count[:scale], name in nbar|delta_over_gamma|p")
    p.add_argument("--axis2", help="second grid axis, same syntax")
    p.add_argument("--workers", type=int, help="worker threads (default $LAMBDA_BLOCH_WORKERS or CPU count)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lambda-bloch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="propagate and write a trajectory CSV + JSON sidecar")
    _add_param_flags(sim)
    _add_common(sim)
    sim.add_argument("--method", help="comma list of spectral|ode|analytic|auto; first one is written")
    sim.add_argument("--t-max", dest="t_max", type=float, help="final time [s] (linear grid)")
    sim.add_argument("--points", type=int, help="number of time samples")
    sim.add_argument("--time-unit", dest="time_unit", choices=["s", "inv_r", "inv_gamma"],
                     help="rescale the t column")
    sim.add_argument("--initial", choices=["mixed", "coherent"], help="named initial state")
    sim.add_argument("--rho11", dest="rho_g1g1", type=float, help="initial rho_g1g1")
    sim.add_argument("--rho22", dest="rho_g2g2", type=float, help="initial rho_g2g2")
    sim.add_argument("--coherence-re", dest="coherence_re", type=float, help="initial Re rho_g1g2")
    sim.add_argument("--coherence-im", dest="coherence_im", type=float, help="initial Im rho_g1g2")
    sim.set_defaults(handler=cmd_simulate)

    reg = sub.add_parser("regimes", help="discriminant map and fitted critical line")
    _add_param_flags(reg)
    _add_common(reg)
    _add_grid_flags(reg)
    reg.set_defaults(handler=cmd_regimes)

    eig = sub.add_parser("eigen", help="eigenvalues, regime and lifetimes as JSON")
    _add_param_flags(eig)
    _add_common(eig)
    eig.set_defaults(handler=cmd_eigen)

    st = sub.add_parser("steady", help="steady state with numerical cross-checks")
    _add_param_flags(st)
    _add_common(st)
    st.set_defaults(handler=cmd_steady)

    lt = sub.add_parser("sweep-lifetimes", help="-1/Re(lambda2) over a parameter grid")
    _add_param_flags(lt)
    _add_common(lt)
    _add_grid_flags(lt)
    lt.set_defaults(handler=cmd_sweep_lifetimes)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = resolve_config(args)
        return args.handler(cfg)
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except RUNTIME_ERRORS as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

"""Regime map of the isotropically pumped Lambda system.

Sweeps pumping strength and level splitting, classifies every node by the
sign of the cubic discriminant, and fits the boundary between the
underdamped and overdamped regimes. In the strong-pumping corner the
boundary is the straight line Delta = f(p) r; at weak pumping it is
Delta = (p^2 / 2) r.

    python3 demos/regime_map.py
"""

from __future__ import annotations

import time

from lambda_bloch.regimes import critical_ratio_weak, critical_slope_strong
from lambda_bloch.sweep import Axis, GridSpec, fit_critical_line, map_regimes


def main():
    for p in (0.5, 0.9, 1.0):
        grid = GridSpec(Axis("nbar", 1e2, 1e4, 128), Axis("delta_over_gamma", 1.0, 1e4, 256), {"p": p})
        start = time.perf_counter()
        rmap = map_regimes(grid)
        fit = fit_critical_line(rmap)
        elapsed = time.perf_counter() - start
        print(f"p={p:<4} strong pumping: fitted Delta/r = {fit.slope:.5f}, f(p) = {critical_slope_strong(p):.5f}, "
              f"log-log exponent {fit.exponent:.4f}  [{elapsed:.2f} s, {rmap.counts()}]")

    # weak pumping: the boundary now sits at Delta/r = p^2/2
    grid = GridSpec(Axis("nbar", 1e-4, 1e-2, 64), Axis("delta_over_gamma", 1e-7, 1e-1, 256), {"p": 1.0})
    fit = fit_critical_line(map_regimes(grid))
    print(f"p=1    weak pumping:   fitted Delta/r = {fit.slope:.5f}, p^2/2 = {critical_ratio_weak(1.0):.5f}")


if __name__ == "__main__":
    main()

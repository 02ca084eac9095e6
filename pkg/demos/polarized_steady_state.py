"""Coherent steady states under x-polarized incoherent pumping.

Polarized light pumps both transitions through the same field mode, so
the steady state keeps a ground-state coherence at any finite splitting.
At Delta = 0 it is the dark state (1/2, 1/2, -1/2) with no excited
population; for Delta >> r it approaches the thermal populations.

    python3 demos/polarized_steady_state.py
"""

from __future__ import annotations

import numpy as np

from lambda_bloch.generator import build_generator
from lambda_bloch.model import SystemParams
from lambda_bloch.observables import steady_state_numeric, steady_state_polarized, thermal_deviation


def main():
    base = SystemParams.symmetric(1e8, 1e-3, delta=0.0, drive_geometry="polarized")
    print(f"r = (3/16 pi) gamma nbar = {base.r:.4e} 1/s")
    print("\n   Delta/r     rho_gg      rho_R        rho_I     pop. deviation   |formula - fixed point|")
    for ratio in (0.0, 0.1, 1.0, 10.0, 1e2, 1e4):
        params = base.with_(delta=ratio * base.r)
        ss = steady_state_polarized(params)
        check = np.max(np.abs(ss.as_array() - steady_state_numeric(build_generator(params)).as_array()))
        dev = thermal_deviation(params)
        print(f"  {ratio:8.1e}  {ss.rho_g1g1:.6f}  {ss.rho_R: .3e}  {ss.rho_I: .3e}   {dev.population: .3e}"
              f"        {check:.1e}")


if __name__ == "__main__":
    main()

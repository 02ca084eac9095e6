"""Long-lived coherent quasi-steady state under strong pumping.

At nbar = 1e3 and Delta/gamma = 10 with p = 1 the system is overdamped.
The coherence builds up within a few 1/r, then sits on a plateau that
decays only at 0.75 Delta^2 / r. During the plateau rho_I = -(Delta/r)
rho_R, and the state's entropy stays below that of the secular thermal
state.

    python3 demos/quasi_steady_state.py
"""

from __future__ import annotations

import numpy as np

from lambda_bloch.dynamics import propagate
from lambda_bloch.generator import build_generator
from lambda_bloch.model import COHERENT_STATE, MIXED_STATE, SystemParams
from lambda_bloch.observables import entropy_series
from lambda_bloch.spectral import eigenvalues, quasi_steady_lifetime


def main():
    params = SystemParams.symmetric(1e9, 1e3, delta_over_gamma=10.0, p=1.0)
    tau = quasi_steady_lifetime(params)
    print(f"tau_c = 1.34 r / Delta^2 = {tau:.3e} s; -1/Re(lambda2) = {-1 / eigenvalues(params).lambda2.real:.3e} s")

    t = np.array([1, 10, 100]) / params.r
    t = np.concatenate([t, np.array([0.5, 1, 2, 4]) * tau])
    traj = propagate(build_generator(params), MIXED_STATE, t)
    print("\n        t [s]      rho_R          rho_I     rho_I / (-(Delta/r) rho_R)")
    for k in range(t.size):
        ratio = traj.rho_I[k] / (-params.delta / params.r * traj.rho_R[k])
        print(f"  {t[k]:.3e}  {traj.rho_R[k]: .6e}  {traj.rho_I[k]: .6e}   {ratio:.5f}")

    # entropy with and without the interference term, from a coherent start
    fano = SystemParams.symmetric(1e9, 1e3, delta_over_gamma=1e2, p=1.0)
    tau = quasi_steady_lifetime(fano)
    t = np.array([1e-3, 1e-1, 1, 10]) / fano.r
    t = np.concatenate([t, np.array([0.5, 1, 5, 50]) * tau])
    s1 = entropy_series(propagate(build_generator(fano), COHERENT_STATE, t))
    s0 = entropy_series(propagate(build_generator(fano.with_(p=0.0)), COHERENT_STATE, t))
    print("\n        t [s]    S(p=1)   S(p=0)   ratio")
    for k in range(t.size):
        print(f"  {t[k]:.3e}   {s1[k]:.4f}   {s0[k]:.4f}   {s1[k] / s0[k]:.3f}")


if __name__ == "__main__":
    main()

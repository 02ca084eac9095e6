from __future__ import annotations

import io
import json
import subprocess
import sys

import numpy as np
import pytest

from lambda_bloch.cli import CSV_COLUMNS, SCHEMA_VERSION, main
from lambda_bloch.regimes import critical_slope_strong


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def test_eigen_block_case(capsys):
    code, out, _ = run(["eigen", "--gamma", "1", "--nbar", "0", "--delta", "1", "--p", "1"], capsys)
    assert code == 0
    rec = json.loads(out)
    lam = rec["eigenvalues"]["cardano"]
    assert lam["lambda1"] == pytest.approx([-2.0, 0.0], abs=1e-14)
    assert lam["lambda2"] == pytest.approx([0.0, 1.0], abs=1e-14)
    assert lam["lambda3"] == pytest.approx([0.0, -1.0], abs=1e-14)
    assert rec["schema"] == SCHEMA_VERSION
    assert rec["params"]["gamma1"] == 1.0 and rec["params"]["p"] == 1.0


def test_eigen_fig2_has_tau_c(capsys):
    code, out, _ = run(["eigen", "--preset", "fig2"], capsys)
    rec = json.loads(out)
    assert code == 0
    assert rec["tau_c"] == pytest.approx(1.34e-8, rel=1e-3)
    assert rec["regime"]["regime"] == "overdamped"
    assert rec["effective_decoherence"]["strong_pumping"] is True


def test_eigen_tau_c_absent_when_underdamped(capsys):
    rec = json.loads(run(["eigen", "--preset", "fig1c"], capsys)[1])
    assert rec["tau_c"] is None and "tau_c_note" in rec
    assert rec["Q"] == pytest.approx(0.5, abs=0.02)


def test_bad_p_is_validation_error(capsys):
    code, _, err = run(["eigen", "--gamma", "1", "--nbar", "1", "--delta", "1", "--p", "1.5"], capsys)
    assert code == 2 and "p" in err


def test_missing_delta_names_field(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# no splitting given\ngamma = 1e9\nnbar = 1e-3\np = 1\n")
    code, _, err = run(["simulate", "--config", str(cfg)], capsys)
    assert code == 2 and "delta" in err


def test_argparse_errors_map_to_validation(capsys):
    assert run(["simulate", "--delta", "1", "--delta-over-gamma", "1"], capsys)[0] == 2
    assert run(["nonsense"], capsys)[0] == 2


def test_runtime_errors_exit_3(capsys):
    code, _, err = run(["steady", "--gamma", "1", "--nbar", "0", "--delta", "0", "--geometry", "polarized"], capsys)
    assert code == 3 and "runtime" in err
    code, _, _ = run(["simulate", "--gamma", "1", "--nbar", "1", "--delta", "0", "--p", "0",
                      "--method", "spectral", "--points", "5"], capsys)
    assert code == 3


def test_simulate_fig1c_oscillates_at_splitting(tmp_path, capsys):
    out = tmp_path / "fig1c"
    assert run(["simulate", "--preset", "fig1c", "--out", str(out)], capsys)[0] == 0
    with open(f"{out}.csv") as fh:
        assert fh.readline().strip() == ",".join(CSV_COLUMNS)
    data = read_csv(f"{out}.csv")
    t, rho_r = data[:, 0], data[:, 4]
    assert data.shape == (3001, 8)
    # zero crossings of rho_R beyond the fast transient are spaced by pi / Delta
    late = t > 5 / 2e9
    s = np.sign(rho_r[late])
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    tl = t[late]
    crossings = tl[idx] - rho_r[late][idx] * (tl[idx + 1] - tl[idx]) / (rho_r[late][idx + 1] - rho_r[late][idx])
    omega = np.pi / np.mean(np.diff(crossings))
    assert omega == pytest.approx(1e7, rel=5e-3)
    meta = json.loads((tmp_path / "fig1c.json").read_text())
    assert meta["params"]["delta"] == pytest.approx(1e7)
    assert meta["regime"]["regime"] == "underdamped"
    assert meta["schema"] == SCHEMA_VERSION


def test_simulate_fig2_method_diagnostics(tmp_path, capsys):
    out = tmp_path / "fig2"
    assert run(["simulate", "--preset", "fig2", "--method", "ode,spectral", "--out", str(out)], capsys)[0] == 0
    meta = json.loads((tmp_path / "fig2.json").read_text())
    assert meta["methods"] == ["ode", "spectral"]
    assert meta["diagnostics"]["max"] < 1e-8


def test_simulate_stdout_and_time_unit(capsys):
    args = ["simulate", "--gamma", "1", "--nbar", "1", "--delta", "1", "--p", "0.5",
            "--t-max", "2", "--points", "5", "--time-unit", "inv_r", "--method", "spectral,ode,analytic"]
    code, out, _ = run(args, capsys)
    assert code == 0
    data = np.loadtxt(io.StringIO(out), delimiter=",", skiprows=1)
    np.testing.assert_allclose(data[:, 0], [0, 0.5, 1, 1.5, 2])
    np.testing.assert_allclose(data[:, 1] + data[:, 2] + data[:, 3], 1.0, atol=1e-12)


def test_simulate_custom_initial_state(capsys):
    args = ["simulate", "--gamma", "1", "--gamma2", "2", "--nbar", "1", "--delta", "1", "--p", "0.5",
            "--rho11", "0.7", "--rho22", "0.2", "--coherence-re", "0.1", "--t-max", "1", "--points", "3"]
    code, out, _ = run(args, capsys)
    assert code == 0
    first = np.loadtxt(io.StringIO(out), delimiter=",", skiprows=1)[0]
    np.testing.assert_allclose(first[1:6], [0.7, 0.2, 0.1, 0.1, 0.0], atol=1e-15)


def test_flags_override_preset(tmp_path, capsys):
    out = tmp_path / "x"
    run(["simulate", "--preset", "fig1c", "--p", "0", "--points", "11", "--out", str(out)], capsys)
    meta = json.loads((tmp_path / "x.json").read_text())
    assert meta["params"]["p"] == 0.0 and meta["points"] == 11


def test_regimes_fig1b(tmp_path, capsys):
    out = tmp_path / "map"
    assert run(["regimes", "--preset", "fig1b", "--out", str(out), "--workers", "2"], capsys)[0] == 0
    D = np.loadtxt(f"{out}.csv", delimiter=",")
    codes = np.loadtxt(f"{out}_regime.csv", delimiter=",")
    assert D.shape == codes.shape == (128, 256)
    meta = json.loads((tmp_path / "map.json").read_text())
    assert meta["critical_line"]["slope"] == pytest.approx(critical_slope_strong(1.0), rel=1e-2)
    assert meta["grid"]["fixed"]["p"] == 1.0


def test_regimes_single_node(capsys):
    code, out, err = run(["regimes", "--p", "1", "--axis1", "nbar:1:1:1", "--axis2", "delta_over_gamma:2:2:1"], capsys)
    assert code == 0
    assert len(out.strip().splitlines()) == 1
    assert json.loads(err)["critical_line"] is None


def test_regimes_log_axis_with_zero_min(capsys):
    code, _, err = run(["regimes", "--p", "1", "--axis1", "nbar:0:1:4:log", "--axis2", "delta_over_gamma:1:2:4"], capsys)
    assert code == 2 and "log" in err


def test_sweep_lifetimes_row_exponent(capsys):
    args = ["sweep-lifetimes", "--p", "1", "--gamma", "1e9", "--axis1", "nbar:1e3:1e3:1",
            "--axis2", "delta_over_gamma:1:30:40:log"]
    code, out, err = run(args, capsys)
    assert code == 0
    meta = json.loads(err)
    assert meta["row_power_laws"][0]["exponent"] == pytest.approx(-2.0, abs=0.05)
    assert meta["lifetime_units"] == "s"
    assert np.loadtxt(io.StringIO(out), delimiter=",").shape == (40,)


def test_steady_polarized_dark_state(capsys):
    code, out, _ = run(["steady", "--gamma", "1e8", "--nbar", "1e-3", "--delta", "0", "--geometry", "polarized"], capsys)
    rec = json.loads(out)
    assert code == 0
    assert rec["analytic"]["rho_ee"] == 0.0
    assert rec["analytic"]["rho_R"] == -0.5
    assert rec["cross_check"]["analytic_vs_integrated"] < 1e-8
    assert rec["thermal_deviation"]["coherence_magnitude"] == 0.5


@pytest.mark.parametrize("p", ["0", "0.6", "1"])
def test_steady_isotropic_is_thermal(p, capsys):
    rec = json.loads(run(["steady", "--gamma", "1e9", "--nbar", "2", "--delta-over-gamma", "0.3", "--p", p], capsys)[1])
    r, g = 2e9, 1e9
    assert rec["analytic"]["rho_g1g1"] == pytest.approx((r + g) / (3 * r + 2 * g), rel=1e-14)
    assert rec["analytic"]["abs_coherence"] == 0.0
    assert rec["cross_check"]["analytic_vs_integrated"] < 1e-8
    assert rec["cross_check"]["analytic_vs_fixed_point"] < 1e-12


def test_steady_fig3b_cross_check(capsys):
    rec = json.loads(run(["steady", "--preset", "fig3b"], capsys)[1])
    assert rec["cross_check"]["analytic_vs_integrated"] < 1e-8
    assert rec["analytic"]["abs_coherence"] > 0


def test_output_is_byte_identical(tmp_path, capsys):
    paths = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        run(["simulate", "--preset", "fig1d", "--points", "200", "--seedless", "--out", str(out)], capsys)
        paths.append(out)
    for ext in (".csv", ".json"):
        assert (tmp_path / f"run0{ext}").read_bytes() == (tmp_path / f"run1{ext}").read_bytes()
    a = tmp_path / "m1"
    b = tmp_path / "m2"
    run(["regimes", "--p", "0.9", "--axis1", "nbar:1:1e3:17", "--axis2", "delta_over_gamma:1:1e3:19",
         "--workers", "1", "--out", str(a)], capsys)
    run(["regimes", "--p", "0.9", "--axis1", "nbar:1:1e3:17", "--axis2", "delta_over_gamma:1:1e3:19",
         "--workers", "4", "--out", str(b)], capsys)
    assert (tmp_path / "m1.csv").read_bytes() == (tmp_path / "m2.csv").read_bytes()


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lambda_bloch", "eigen", "--preset", "fig2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "eigen"

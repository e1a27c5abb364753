from __future__ import annotations

import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from dgdiff.cli import main


def _rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--out_dir", str(out)])
    return code, out


def test_analyze_outputs(tmp_path):
    code, out = _run(tmp_path, "analyze", "--formulation", "BR2", "--p", "2", "--eta", "1",
                     "--tau_p", "1", "0.5", "--K_grid", "21")
    assert code == 0
    for tp in ("1", "0.5"):
        rows = _rows(out / f"profile_tau_p={tp}.csv")
        assert list(rows[0]) == ["K", "G_true", "G_phys", "G_exact", "dG"]
        assert len(rows) == 21
        K = [float(r["K"]) for r in rows]
        assert K[0] == 0.0 and K[-1] == math.pi
    modes = _rows(out / "modes.csv")
    assert len(modes) == 21 * 3
    assert list(modes[0]) == ["K", "mode", "lambda_re", "lambda_im", "neg_Km2", "Gamma"]
    cfg = json.loads((out / "config.json").read_text())
    assert cfg["command"] == "analyze" and cfg["tau_p"] == [1.0, 0.5]


def test_analyze_nyquist_less_dissipative(tmp_path):
    code, out = _run(tmp_path, "analyze", "--K_grid", "11")
    last = _rows(out / "profile_tau_p=1.csv")[-1]
    assert float(last["G_true"]) > float(last["G_exact"])


def test_scan_eta_paper_precision(tmp_path):
    code, out = _run(tmp_path, "scan", "--scan", "eta", "--formulation", "BR2", "--paper-precision")
    assert code == 0
    rows = _rows(out / "eta_min.csv")
    got = [float(r["eta_min"]) for r in rows]
    table = [0.50, 0.67, 0.75, 0.80, 0.83, 0.86, 0.88, 0.89]
    assert all(abs(a - b) <= 0.01 + 1e-9 for a, b in zip(got, table))
    assert rows[0]["eta_min"] == "0.50"


def test_scan_dtau_examples(tmp_path):
    code, out = _run(tmp_path, "scan", "--scan", "dtau", "--formulation", "LDG", "--p", "3",
                     "--eta", "0", "--rk", "RK4")
    assert code == 0
    (row,) = _rows(out / "dtau_max.csv")
    assert float(row["dtau_max"]) == pytest.approx(0.0063, rel=0.02)
    code, out = _run(tmp_path, "scan", "--scan", "dtau", "--formulation", "BR2", "--p", "1",
                     "--eta", "1.0", "--rk", "RK2", name="b")
    (row,) = _rows(out / "dtau_max.csv")
    assert float(row["dtau_max"]) == pytest.approx(0.1498, rel=0.002)


def test_scan_unstable_entry_exit_code(tmp_path):
    code, out = _run(tmp_path, "scan", "--scan", "dtau", "--p", "2", "--eta", "0.3")
    assert code == 3
    (row,) = _rows(out / "dtau_max.csv")
    assert row["dtau_max"] == "nan"


def test_solve_fourier_mode_report(tmp_path):
    code, out = _run(tmp_path, "solve", "--experiment", "fourier_mode", "--formulation", "LDG",
                     "--eta", "0")
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["E_init"] == pytest.approx(0.9962, abs=5e-4)
    rows = _rows(out / "fourier_mode.csv")
    assert float(rows[0]["G_num"]) == pytest.approx(0.1128, abs=1e-3)
    hist = _rows(out / "history.csv")
    assert hist[0]["t"] == "0" and all(r["status"] == "ok" for r in hist)
    assert (out / "snapshot.csv").exists()


def test_solve_fourier_blowup(tmp_path):
    code, out = _run(tmp_path, "solve", "--experiment", "fourier_mode", "--dt", "0.005",
                     "--tau_p", "100")
    assert code == 3
    hist = _rows(out / "history.csv")
    assert hist[-1]["status"].startswith("blowup")
    assert hist[0]["status"] == "ok"
    assert json.loads((out / "report.json").read_text())["status"] == "unstable"


def test_solve_gaussian_wide_initial_spectrum(tmp_path):
    code, out = _run(tmp_path, "solve", "--experiment", "gaussian", "--tau_p", "0.01")
    assert code == 0
    rows = _rows(out / "gaussian_initial_fft.csv")
    K = np.array([float(r["K"]) for r in rows])
    E = np.array([float(r["E_exact"]) for r in rows])
    assert K[-1] == pytest.approx(math.pi)
    assert np.all(E[K <= 0.95 * math.pi] / E[0] > 1e-6)
    assert list(_rows(out / "gaussian_G.csv")[0]) == ["tau_p", "K", "G_num", "G_exact"]


def test_solve_burgers_zero_time(tmp_path):
    code, out = _run(tmp_path, "solve", "--experiment", "burgers", "--n_samples", "1",
                     "--t_end", "0", "--k_max", "256")
    assert code == 0
    assert (out / "spectrum.csv").read_text() == (out / "spectrum_initial.csv").read_text()
    rows = _rows(out / "spectrum.csv")
    assert list(rows[0]) == ["k", "E_mean", "E_std", "n_valid_samples"]
    assert len(rows) == 50 * 3 // 2 + 1


def test_solve_burgers_blowup_marker(tmp_path):
    code, out = _run(tmp_path, "solve", "--experiment", "burgers", "--n_samples", "2",
                     "--t_end", "0.2", "--dt", "0.05", "--k_max", "256")
    assert code == 3
    rows = _rows(out / "pe_history.csv")
    assert rows[-1]["status"].startswith("blowup")


def test_config_echo_roundtrip(tmp_path):
    code, a = _run(tmp_path, "solve", "--experiment", "burgers", "--n_samples", "2",
                   "--t_end", "0.005", "--k_max", "128", "--N_e", "20", name="a")
    assert code == 0
    b = tmp_path / "b"
    assert main(["solve", "--config", str(a / "config.json"), "--out_dir", str(b)]) == 0
    for name in ("spectrum.csv", "spectrum_initial.csv", "pe_history.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_json_format(tmp_path):
    code, out = _run(tmp_path, "analyze", "--K_grid", "5", "--format", "json")
    assert code == 0
    data = json.loads((out / "profile_tau_p=1.json").read_text())
    assert len(data) == 5 and set(data[0]) == {"K", "G_true", "G_phys", "G_exact", "dG"}
    assert not list(out.glob(".*.tmp"))


@pytest.mark.parametrize("args,key", [
    (["analyze", "--p", "0"], "p"),
    (["analyze", "--formulation", "CDG"], "formulation"),
    (["analyze", "--gamma", "-1"], "gamma"),
    (["solve", "--experiment", "fourier_mode", "--K_target", "1.0"], "K_target"),
    (["solve", "--experiment", "warp"], "experiment"),
    (["scan", "--scan", "both"], "scan"),
    (["analyze", "--format", "xml"], "format"),
])
def test_invalid_config_names_key(tmp_path, capsys, args, key):
    assert main([*args, "--out_dir", str(tmp_path / "x")]) == 2
    assert f"'{key}'" in capsys.readouterr().err


def test_unknown_key_in_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"formulation": "BR2", "penalty": 2}))
    assert main(["analyze", "--config", str(cfg), "--out_dir", str(tmp_path / "x")]) == 2
    assert "'penalty'" in capsys.readouterr().err


def test_flags_override_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "analyze", "p": 3, "K_grid": 5}))
    out = tmp_path / "o"
    assert main(["analyze", "--config", str(cfg), "--p", "1", "--out_dir", str(out)]) == 0
    echo = json.loads((out / "config.json").read_text())
    assert echo["p"] == 1 and echo["K_grid"] == 5


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "dgdiff.cli", "analyze", "--K_grid", "3",
                           "--out_dir", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr

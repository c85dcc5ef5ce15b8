"""Command-line interface: exit codes, output formats, determinism."""

import hashlib
import json
import subprocess
import sys

import pytest

from magnomech.cli import main

BASE_RAW = {
    "cavity": {"omega_c": 1.0e10, "kappa_c": 2.1e6},
    "spheres": [
        {"omega_n": 1.0e10, "kappa_n": 1.0e5, "r": 1.5e6,
         "omega_d": 1.0e7, "gamma_d": 100.0, "R_eff": 1.0e6},
        {"omega_n": 1.0e10, "kappa_n": 1.0e5, "r": 1.5e6,
         "omega_d": 1.0e7, "gamma_d": 100.0, "R_eff": 1.0e6},
    ],
    "opa": {"lambda": 0.0, "theta": 0.0},
    "detuning_overrides": {"delta_c": 1.0e7, "delta_n1": 1.0e7,
                           "delta_n2": 1.0e7},
}


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_spectrum_stdout_csv(capsys):
    code, out, err = _run(["spectrum", "--preset", "fig2a",
                           "--grid", "0.8:1.2:11"], capsys)
    assert code == 0
    assert err == ""
    lines = out.splitlines()
    assert lines[0].startswith("# magnomech spectrum")
    assert lines[1] == "delta_over_omega_d,re_eout,im_eout,re_T,im_T,phase_rad,tau_us"
    assert len(lines) == 2 + 11
    first = lines[2].split(",")
    assert len(first) == 7
    assert float(first[0]) == pytest.approx(0.8)


def test_missing_config_file(capsys):
    code, _, err = _run(["spectrum", "--config", "/no/such/file.json"], capsys)
    assert code == 2
    assert err.startswith("error:")


def test_unknown_preset_lists_names(capsys):
    code, _, err = _run(["spectrum", "--preset", "fig9z"], capsys)
    assert code == 2
    assert "fig2a" in err and "fig6" in err


def test_unknown_vary_path_lists_valid(capsys):
    code, _, err = _run(["sweep", "--preset", "fig2a", "--observable",
                         "n_dips", "--vary", "bogus.path=0:1:2"], capsys)
    assert code == 2
    assert "bogus.path" in err
    assert "spheres.0.R_eff" in err


def test_zero_width_grid(capsys):
    code, _, err = _run(["spectrum", "--preset", "fig2a",
                         "--grid", "1:1:100"], capsys)
    assert code == 2
    assert "error:" in err


def test_missing_required_arguments(capsys):
    code = main(["sweep", "--preset", "fig2a"])
    assert code == 2


def test_numerical_failure_exit_code(tmp_path, capsys):
    # lambda = kappa_c/2 puts the parametric gain exactly at threshold
    raw = json.loads(json.dumps(BASE_RAW))
    raw["opa"]["lambda"] = 1.05e6
    raw["detuning_overrides"]["delta_c"] = 0.0
    path = tmp_path / "threshold.json"
    path.write_text(json.dumps(raw))
    code, _, err = _run(["steady", "--config", str(path)], capsys)
    assert code == 1
    assert "error:" in err


def test_engine_both_reports_agreement(capsys):
    code, out, _ = _run(["spectrum", "--preset", "fig3a", "--engine", "both",
                         "--grid", "0.8:1.2:51"], capsys)
    assert code == 0
    tail = out.splitlines()[-1]
    assert tail.startswith("# max_rel_diff = ")
    assert float(tail.split("=")[1]) <= 1e-9


def test_features_json_counts(capsys):
    code, out, _ = _run(["spectrum", "--preset", "fig2a", "--features"],
                        capsys)
    assert code == 0
    feats = json.loads(out)
    assert feats["n_dips"] == 3
    assert feats["n_peaks"] == 4
    assert len(feats["dips"]) == 3
    assert all(d["width_over_omega_d"] > 0.0 for d in feats["dips"])


def test_resonant_dips_stay_symmetric(capsys):
    code, out, _ = _run(["spectrum", "--preset", "fig4c", "--features"],
                        capsys)
    assert code == 0
    feats = json.loads(out)
    thr = feats["fano_threshold"]
    assert feats["n_dips"] >= 2
    assert all(abs(d["asymmetry"]) < thr for d in feats["dips"])


def test_sweep_dip_count_progression(capsys):
    counts = []
    for value in ("0", "2e6", "3.5e6", "4e6"):
        code, out, _ = _run(["sweep", "--preset", "fig2a", "--observable",
                             "n_dips", "--vary",
                             f"spheres.0.R_eff={value}:{value}:1"], capsys)
        assert code == 0
        lines = out.splitlines()
        assert lines[1] == "spheres.0.R_eff,n_dips,stable"
        cells = lines[2].split(",")
        assert cells[2] == "true"
        counts.append(int(cells[1]))
    assert counts == [3, 4, 4, 4]


def test_two_parameter_sweep_shape(capsys):
    code, out, _ = _run(["sweep", "--preset", "fig2a", "--observable",
                         "peak_tau", "--grid", "0.8:1.2:101",
                         "--vary", "spheres.0.R_eff=0:2e6:2",
                         "--vary2", "opa.lambda=0:1e6:2"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[1] == "spheres.0.R_eff,opa.lambda,peak_tau_us,stable"
    rows = [ln.split(",") for ln in lines[2:] if not ln.startswith("#")]
    assert len(rows) == 4
    assert all(len(r) == 4 for r in rows)
    assert [r[0] for r in rows] == ["0", "0", "2000000", "2000000"]


def test_validate_reports_kerr_flag(tmp_path, capsys):
    raw = json.loads(json.dumps(BASE_RAW))
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(raw))
    code, out, _ = _run(["validate", "--config", str(path)], capsys)
    assert code == 0
    report = json.loads(out)
    assert set(report["validity"]) == {"kerr", "occupation_1", "occupation_2",
                                       "hierarchy"}
    for entry in report["validity"].values():
        assert entry["flag"] in ("pass", "warn")
    assert isinstance(report["all_pass"], bool)


def test_steady_preset_operating_point(capsys):
    code, out, _ = _run(["steady", "--preset", "fig2b"], capsys)
    assert code == 0
    state = json.loads(out)
    assert state["abs_n_1s"] == pytest.approx(7071067.811865475, rel=1e-12)
    assert state["iterations"] == 0
    assert state["x_1s"] == 0.0
    assert "validity" in state


def test_delay_writes_summary(tmp_path, capsys):
    out_path = tmp_path / "delay.csv"
    code, out, _ = _run(["delay", "--preset", "fig5a",
                         "--out", str(out_path)], capsys)
    assert code == 0
    summary = json.loads(out)
    assert summary["peak_tau_us"] == pytest.approx(10.0406, rel=1e-3)
    assert summary["peak_at_delta_over_omega_d"] == pytest.approx(0.92,
                                                                  abs=1e-6)
    text = out_path.read_text()
    assert "# peak_tau_us = " in text
    assert "# min_tau_us = " in text


def test_lambda_flag_matches_preset(tmp_path, capsys):
    # fig5b is fig5a plus lambda = 1.5 kappa_c
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert main(["spectrum", "--preset", "fig5a", "--lambda", "1.5",
                 "--grid", "0.8:1.2:51", "--out", str(a)]) == 0
    assert main(["spectrum", "--preset", "fig5b",
                 "--grid", "0.8:1.2:51", "--out", str(b)]) == 0
    data = a.read_text().splitlines()[1:]
    assert data == b.read_text().splitlines()[1:]


def test_sweep_byte_determinism(tmp_path, monkeypatch, capsys):
    argv = ["sweep", "--preset", "fig2b", "--observable", "min_tau",
            "--grid", "0.9:1.1:101", "--vary", "opa.lambda=0:2e6:3"]
    digests = []
    for threads in ("1", "3"):
        monkeypatch.setenv("MAGNOMECH_THREADS", threads)
        code, out, _ = _run(argv, capsys)
        assert code == 0
        digests.append(hashlib.md5(out.encode()).hexdigest())
    assert digests[0] == digests[1]


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "magnomech.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    for sub in ("steady", "spectrum", "delay", "sweep", "validate"):
        assert sub in proc.stdout

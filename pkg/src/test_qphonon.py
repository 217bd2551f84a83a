import json

import pandas as pd
import pytest

from qphonon import *


def _write_doc(tmp_path, doc, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def _run(command, doc, tmp_path, *extra):
    path = _write_doc(tmp_path, doc)
    out = tmp_path / "out"
    return main([command, "--config", str(path), "--output-dir", str(out), *extra]), out


QUIET_PULSE = {"kind": "constant", "amplitude": 0.0}


def _evolve_doc(n_total=8, pulse=QUIET_PULSE, n_points=11):
    return {
        "schema_version": 1,
        "command": "evolve",
        "evolve": {
            "n_total": n_total,
            "omega_e": 1.0,
            "pulse": pulse,
            "time": {"t_max": 2.0, "n_points": n_points},
            "sign_resolution": "derived",
        },
    }


def test_strip_settings_flags():
    argv = ["sweep", "--config", "c.json", "--WORKERS", "2", "--OUTPUT_DIR=/tmp/x", "--workers", "3"]
    assert strip_settings_flags(argv) == ["sweep", "--config", "c.json", "--workers", "3"]


def test_algebra_check_succeeds(tmp_path):
    doc = {
        "schema_version": 1,
        "command": "algebra-check",
        "algebra-check": {"n_values": [1, 2, 5], "dressed_pairs": [[2, 3]]},
    }
    code, out = _run("algebra-check", doc, tmp_path)
    assert code == EXIT_OK
    report = json.loads((out / "algebra_check_report.json").read_text())
    assert report["passed"] is True
    assert report["resolved_sign_s"] == -1
    assert set(report["gardiner"]) == {"N=1", "N=2", "N=5"}
    assert report["wall_clock_seconds"] >= 0
    residuals = pd.read_csv(out / "algebra_check_residuals.csv")
    assert residuals["passed"].all()
    assert set(residuals["algebra"]) == {"gardiner", "dressed"}


def test_invalid_atom_number_exits_with_config_code(tmp_path, caplog):
    code, out = _run("evolve", _evolve_doc(n_total=0), tmp_path)
    assert code == EXIT_CONFIG
    assert "evolve.n_total" in caplog.text
    assert not (out / "evolve.csv").exists()


def test_negative_width_exits_with_config_code(tmp_path, caplog):
    pulse = {"kind": "gaussian", "amplitude": 0.4, "omega_f": 1.0, "center": 3.0, "width": -1.0}
    code, _ = _run("evolve", _evolve_doc(pulse=pulse), tmp_path)
    assert code == EXIT_CONFIG
    assert "evolve.pulse.width" in caplog.text


def test_command_mismatch(tmp_path):
    code, _ = _run("sweep", _evolve_doc(), tmp_path)
    assert code == EXIT_CONFIG


def test_evolve_without_drive(tmp_path):
    """
    mu = 0 keeps every column at its vacuum value; one row per grid time.
    """
    code, out = _run("evolve", _evolve_doc(), tmp_path)
    assert code == EXIT_OK
    table = pd.read_csv(out / "evolve.csv")
    assert list(table.columns) == dynamics.EVOLVE_COLUMNS
    assert len(table) == 11
    for column in dynamics.EVOLVE_COLUMNS[1:]:
        assert (table[column] - table[column].iloc[0]).abs().max() <= 1e-10, column
    assert table["var_x1_exact"].iloc[0] == pytest.approx(0.5)
    report = json.loads((out / "evolve_report.json").read_text())
    assert report["sign_source"] == "derived"
    assert report["validity_warning"] is False


def test_evolve_reports_step_halving(tmp_path):
    pulse = {"kind": "gaussian", "amplitude": 0.4, "omega_f": 1.0, "center": 1.0, "width": 0.5}
    doc = _evolve_doc(n_total=16, pulse=pulse, n_points=41)
    doc["evolve"].update(check_step=True, substeps=8)
    code, out = _run("evolve", doc, tmp_path)
    assert code == EXIT_OK
    report = json.loads((out / "evolve_report.json").read_text())
    assert 0 <= report["step_halving_change"] < 1e-8
    assert report["substeps"] == 8


def test_rabi_command(tmp_path):
    doc = {
        "schema_version": 1,
        "command": "rabi",
        "rabi": {
            "g": 0.1,
            "omega_e": 1.1,
            "omega_f": 1.0,
            "n_total": 4,
            "time": {"t_max": 20.0, "n_points": 101},
            "substeps": 16,
        },
    }
    code, out = _run("rabi", doc, tmp_path)
    assert code == EXIT_OK
    report = json.loads((out / "rabi_report.json").read_text())
    assert report["analytic_vs_amplitude"]["passed"] is True
    assert report["peak_transfer_fraction"] == pytest.approx(0.8)
    assert report["analytic_vs_fock"] < 1e-6
    assert len(pd.read_csv(out / "rabi.csv")) == 101


def test_dressed_check_command(tmp_path):
    doc = {
        "schema_version": 1,
        "command": "dressed-check",
        "seed": 3,
        "dressed-check": {
            "pairs": [[1, 1], [3, 2]],
            "random_pairs": 2,
            "random_max": 10,
            "dynamics": {
                "n_total": 8,
                "delta": 8,
                "omega_e": 1.0,
                "g": 0.05,
                "time": {"t_max": 2.0, "n_points": 21},
            },
        },
    }
    code, out = _run("dressed-check", doc, tmp_path)
    assert code == EXIT_OK
    report = json.loads((out / "dressed_check_report.json").read_text())
    assert report["passed"] is True
    assert "N=3,Delta=2" in report["dressed"]
    assert "hamiltonian_forms" in report["dressed"]["N=1,Delta=1"]
    assert report["dynamics"]["mu_d"] == pytest.approx(0.4)
    assert len(pd.read_csv(out / "dressed_dynamics.csv")) == 21


def test_sweep_is_deterministic_across_workers(tmp_path):
    doc = {
        "schema_version": 1,
        "command": "sweep",
        "sweep": {
            "n_values": [16, 8],
            "omega_e": 1.0,
            "pulse": {"kind": "gaussian", "amplitude": 0.4, "omega_f": 1.0, "center": 3.0, "width": 1.0},
            "time": {"t_max": 8.0, "n_points": 41},
            "sign_resolution": "derived",
        },
    }
    path = _write_doc(tmp_path, doc)
    serial = tmp_path / "serial"
    parallel = tmp_path / "parallel"
    assert main(["sweep", "--config", str(path), "--output-dir", str(serial), "--workers", "1"]) == 0
    assert main(["sweep", "--config", str(path), "--output-dir", str(parallel), "--workers", "2"]) == 0
    assert (serial / "sweep.csv").read_bytes() == (parallel / "sweep.csv").read_bytes()

    report = json.loads((serial / "sweep_report.json").read_text())
    assert report["failed_points"] == []
    assert set(report["ratios"]) == set(convergence.RATIO_COLUMNS.values())


def test_output_dir_precedence(tmp_path):
    doc = _evolve_doc()
    doc["output_dir"] = str(tmp_path / "from_document")
    path = _write_doc(tmp_path, doc)

    assert main(["evolve", "--config", str(path)]) == 0
    assert (tmp_path / "from_document" / "evolve.csv").exists()

    flag = tmp_path / "from_flag"
    assert main(["evolve", "--config", str(path), "--output-dir", str(flag)]) == 0
    assert (flag / "evolve.csv").exists()


def test_resolve_output_dir_falls_back_to_settings(tmp_path):
    run = load_config(_write_doc(tmp_path, _evolve_doc()))
    assert resolve_output_dir(None, run) == config("OUTPUT_DIR")
    assert resolve_output_dir(tmp_path, run) == tmp_path.resolve()

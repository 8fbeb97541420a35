"""End-to-end CLI runs: exit codes, schema-valid reports, config precedence."""

import csv
import io
import json
import shutil
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from germflow.cli import main

with resources.files("germflow").joinpath("report_schema.json").open() as _fh:
    SCHEMA = json.load(_fh)

CUBIC = ["--f", "x1^2", "--g", "x1^2 + 0.25*x1^3", "--n", "1"]
SMALL_SAMPLING = ["--shells", "2", "--points-per-shell", "2"]


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured


def run_json(capsys, argv):
    code, captured = run_cli(capsys, argv)
    report = json.loads(captured.out)
    jsonschema.validate(report, SCHEMA)
    return code, report


class TestExitCodes:
    def test_check_pass(self, capsys):
        code, report = run_json(capsys, ["check", *CUBIC, "--r", "1"])
        assert code == 0
        assert report["verdict"] == "PASS"
        assert report["c_estimate"] == pytest.approx(0.1875, abs=1e-9)

    def test_verify_identity(self, capsys):
        code, report = run_json(
            capsys, ["verify", "--f", "x1^2", "--g", "x1^2", "--n", "1", "--r", "1", *SMALL_SAMPLING]
        )
        assert code == 0
        assert report["max_residual"] <= 1e-12

    def test_check_fail(self, capsys):
        code, report = run_json(capsys, ["check", "--f", "x1^2", "--g", "2*x1^2", "--n", "1", "--r", "1"])
        assert code == 1
        assert report["verdict"] == "FAIL"

    def test_inconclusive_is_not_fail(self, capsys):
        code, report = run_json(
            capsys,
            [
                "check", "--f", "x1^2", "--g", "2*x1^2", "--n", "1", "--r", "1",
                "--radius-min", "0.05", "--radius-max", "0.2",
            ],
        )
        assert code == 0
        assert report["verdict"] == "INCONCLUSIVE"

    def test_missing_n(self, capsys):
        code, captured = run_cli(capsys, ["check", "--f", "x1^2", "--g", "x1^2"])
        assert code == 2
        assert captured.err.startswith("error:")
        assert "--n" in captured.err

    def test_missing_g(self, capsys):
        code, captured = run_cli(capsys, ["check", "--f", "x1^2", "--n", "1"])
        assert code == 2
        assert "--g" in captured.err

    def test_unparsable_germ(self, capsys):
        code, captured = run_cli(capsys, ["check", "--f", "x1^2 + 1", "--g", "x1^2", "--n", "1"])
        assert code == 2
        assert captured.err.startswith("error:")

    def test_unknown_command(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["bogus"])
        assert exc.value.code == 2

    def test_flow_csv_needs_x0(self, capsys):
        code, captured = run_cli(capsys, ["flow", *CUBIC, "--format", "csv", *SMALL_SAMPLING])
        assert code == 2
        assert "--x0" in captured.err

    def test_genpair_refuses_csv(self, capsys):
        code, captured = run_cli(
            capsys, ["genpair", "--f", "x1^2", "--n", "1", "--multiplier", "1/32", "--format", "csv"]
        )
        assert code == 2
        assert "JSON" in captured.err

    def test_genpair_needs_multiplier_source(self, capsys):
        code, captured = run_cli(capsys, ["genpair", "--f", "x1^2", "--n", "1"])
        assert code == 2
        assert "--multiplier" in captured.err or "--gen-seed" in captured.err

    def test_genpair_multiplier_count_mismatch(self, capsys):
        code, captured = run_cli(
            capsys,
            ["genpair", "--f", "x1^2", "--n", "1", "--multiplier", "1", "--multiplier", "2"],
        )
        assert code == 2
        assert "expected 1 multipliers" in captured.err

    def test_distbound_noncritical_without_points(self, capsys):
        code, captured = run_cli(capsys, ["distbound", "--f", "x1", "--n", "1"])
        assert code == 2
        assert "--zero-points" in captured.err


class TestReports:
    def test_check0_report(self, capsys):
        code, report = run_json(capsys, ["check0", "--f", "x1^2", "--g", "x1^2 + x1^4", "--n", "1"])
        assert code == 0
        assert report["verdict"] == "PASS"
        labels = [rec["label"] for rec in report["records"]]
        assert labels == ["value", "gradient"]

    def test_flow_report_forward(self, capsys):
        code, report = run_json(capsys, ["flow", *CUBIC, "--x0", "0.1"])
        assert code == 0
        rec = report["records"][0]
        assert rec["x0"] == [0.1]
        assert rec["t_end"] == 1.0
        assert rec["y_end"][0] == pytest.approx(0.09878756724282899, abs=1e-9)
        assert report["conservation_drift"] <= 1e-9

    def test_flow_report_inverse(self, capsys):
        code, report = run_json(capsys, ["flow", *CUBIC, "--x0", "0.1", "--direction", "inverse"])
        assert code == 0
        assert report["records"][0]["t_end"] == 0.0

    def test_flow_sampled_starts(self, capsys):
        code, report = run_json(capsys, ["flow", *CUBIC, *SMALL_SAMPLING])
        assert code == 0
        assert len(report["records"]) == 4

    def test_verify_report(self, capsys):
        code, report = run_json(capsys, ["verify", *CUBIC, "--r", "1", *SMALL_SAMPLING])
        assert code == 0
        assert report["max_residual"] <= 1e-8
        assert report["round_trip_max"] <= 1e-7
        assert report["jacobian"]["min_det"] > 0.0
        assert len(report["records"]) == 4

    def test_loja_single_germ(self, capsys):
        code, report = run_json(
            capsys, ["loja", "--f", "x1^2", "--n", "1", "--shells", "5", "--points-per-shell", "4"]
        )
        assert code == 0
        assert report["eta"]["eta_hat"] == pytest.approx(0.5, abs=1e-9)

    def test_loja_compare(self, capsys):
        code, report = run_json(
            capsys,
            ["loja", *CUBIC, "--shells", "5", "--points-per-shell", "4"],
        )
        assert code == 0
        assert report["eta"]["delta"] <= 0.05

    def test_loja_default_sampling(self, capsys):
        code, report = run_json(capsys, ["loja", "--f", "x1^2", "--n", "1"])
        assert code == 0
        sampling = report["config"]["sampling"]
        assert sampling["radius_max"] == 0.1
        assert sampling["shells"] == 12
        assert sampling["points_per_shell"] == 64

    def test_genpair_explicit_multiplier(self, capsys):
        code, report = run_json(
            capsys, ["genpair", "--f", "x1^2", "--n", "1", "--multiplier", "1/32"]
        )
        assert code == 0
        assert report["g"] == "x1^2 + 1/4*x1^3"
        rec = report["records"][0]
        assert rec["multiplier"] == "1/32"
        assert rec["word"] == [1, 1, 1]
        assert rec["generator"] == "8*x1^3"

    def test_genpair_seeded_deterministic(self, capsys):
        _, first = run_json(capsys, ["genpair", "--f", "x1^2 + x2^2", "--n", "2", "--gen-seed", "5"])
        _, second = run_json(capsys, ["genpair", "--f", "x1^2 + x2^2", "--n", "2", "--gen-seed", "5"])
        assert first["g"] == second["g"]
        assert first["records"] == second["records"]

    def test_distbound_report(self, capsys):
        code, report = run_json(capsys, ["distbound", "--f", "x1^2", "--n", "1"])
        assert code == 0
        assert report["a_estimate"] == pytest.approx(2.0, rel=1e-12)
        assert report["verdict"] == "PASS"

    def test_distbound_explicit_points(self, capsys):
        code, report = run_json(
            capsys, ["distbound", "--f", "x1^2 + x2^2", "--n", "2", "--zero-points", "0,0"]
        )
        assert code == 0
        assert report["a_estimate"] == pytest.approx(2.0, rel=1e-9)
        assert report["config"]["zero_points"] == [[0.0, 0.0]]

    def test_runs_are_reproducible(self, capsys):
        _, first = run_json(capsys, ["check", *CUBIC, "--r", "1"])
        _, second = run_json(capsys, ["check", *CUBIC, "--r", "1"])
        first.pop("runtime_ms")
        second.pop("runtime_ms")
        assert first == second

    def test_backend_flag_recorded(self, capsys):
        code, report = run_json(capsys, ["check", *CUBIC, "--backend", "fallback"])
        assert code == 0
        assert report["config"]["backend"] == "fallback"


class TestConfigFile:
    def test_file_supplies_values(self, capsys, tmp_path):
        cfg = {
            "f_expr": "x1^2",
            "g_expr": "x1^2 + 0.25*x1^3",
            "n": 1,
            "r": 1,
            "sampling": {"radius_max": 0.1, "seed": 3},
        }
        path = tmp_path / "run.json"
        path.write_text(json.dumps(cfg))
        code, report = run_json(capsys, ["check", "--config", str(path)])
        assert code == 0
        assert report["config"]["sampling"]["radius_max"] == 0.1
        assert report["config"]["sampling"]["seed"] == 3
        # untouched keys fall back to defaults
        assert report["config"]["sampling"]["radius_min"] == 1e-4

    def test_flags_override_file(self, capsys, tmp_path):
        cfg = {
            "f_expr": "x1^2",
            "g_expr": "x1^2 + 0.25*x1^3",
            "n": 1,
            "sampling": {"radius_max": 0.1},
        }
        path = tmp_path / "run.json"
        path.write_text(json.dumps(cfg))
        code, report = run_json(
            capsys, ["check", "--config", str(path), "--radius-max", "0.15", "--g", "x1^2"]
        )
        assert code == 0
        assert report["config"]["sampling"]["radius_max"] == 0.15
        assert report["config"]["g_expr"] == "x1^2"
        assert report["c_estimate"] == 0.0

    def test_integrator_settings_from_file(self, capsys, tmp_path):
        cfg = {
            "f_expr": "x1^2",
            "g_expr": "x1^2 + 0.25*x1^3",
            "n": 1,
            "integrator": {"rel_tol": 1e-8, "max_steps": 5000},
        }
        path = tmp_path / "run.json"
        path.write_text(json.dumps(cfg))
        code, report = run_json(capsys, ["flow", "--config", str(path), "--x0", "0.1"])
        assert code == 0
        assert report["config"]["integrator"]["rel_tol"] == 1e-8
        assert report["config"]["integrator"]["max_steps"] == 5000
        assert report["config"]["integrator"]["abs_tol"] == 1e-10

    def test_non_object_config_rejected(self, capsys, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("[1, 2]")
        code, captured = run_cli(capsys, ["check", "--config", str(path), "--n", "1"])
        assert code == 2
        assert "JSON object" in captured.err

    def test_missing_config_file(self, capsys, tmp_path):
        code, captured = run_cli(capsys, ["check", "--config", str(tmp_path / "nope.json"), "--n", "1"])
        assert code == 2
        assert captured.err.startswith("error:")


class TestCsvOutput:
    def test_check_csv(self, capsys):
        code, captured = run_cli(capsys, ["check", *CUBIC, "--r", "1", "--format", "csv"])
        assert code == 0
        rows = list(csv.reader(io.StringIO(captured.out)))
        assert rows[0] == ["shell_radius", "x1", "ratio_m=(0)", "ratio_m=(1)"]
        assert len(rows) == 1 + 64
        assert float(rows[1][3]) == pytest.approx(3 / 16, abs=1e-12)

    def test_check0_csv(self, capsys):
        code, captured = run_cli(
            capsys, ["check0", "--f", "x1^2", "--g", "x1^2 + x1^4", "--n", "1", "--format", "csv"]
        )
        assert code == 0
        rows = list(csv.reader(io.StringIO(captured.out)))
        assert rows[0] == ["shell_radius", "x1", "ratio_value", "ratio_gradient"]

    def test_flow_trajectory_csv(self, capsys):
        code, captured = run_cli(capsys, ["flow", *CUBIC, "--x0", "0.1", "--format", "csv"])
        assert code == 0
        rows = list(csv.reader(io.StringIO(captured.out)))
        assert rows[0] == ["t", "y1", "F", "|W|"]
        ts = [float(r[0]) for r in rows[1:]]
        assert ts[0] == 0.0
        assert ts[-1] == 1.0
        assert ts == sorted(ts)
        f_vals = [float(r[2]) for r in rows[1:]]
        assert max(abs(v - f_vals[0]) for v in f_vals) <= 1e-9

    def test_verify_csv(self, capsys):
        code, captured = run_cli(
            capsys, ["verify", *CUBIC, "--r", "1", *SMALL_SAMPLING, "--format", "csv"]
        )
        assert code == 0
        rows = list(csv.reader(io.StringIO(captured.out)))
        assert rows[0] == ["x1", "residual", "round_trip_error"]
        assert len(rows) == 1 + 4

    def test_loja_csv(self, capsys):
        code, captured = run_cli(
            capsys,
            ["loja", "--f", "x1^2", "--n", "1", "--shells", "5", "--points-per-shell", "4",
             "--format", "csv"],
        )
        assert code == 0
        rows = list(csv.reader(io.StringIO(captured.out)))
        assert rows[0] == ["shell_radius", "x1", "abs_f", "grad_norm"]
        assert len(rows) == 1 + 20

    def test_distbound_csv(self, capsys):
        code, captured = run_cli(capsys, ["distbound", "--f", "x1^2", "--n", "1", "--format", "csv"])
        assert code == 0
        rows = list(csv.reader(io.StringIO(captured.out)))
        assert rows[0] == ["shell_radius", "x1", "ratio_grad_vs_dist"]
        assert all(float(r[2]) == pytest.approx(2.0, rel=1e-12) for r in rows[1:])


class TestOutputFile:
    def test_json_to_file(self, capsys, tmp_path):
        out = tmp_path / "report.json"
        code, captured = run_cli(capsys, ["check", *CUBIC, "--r", "1", "--out", str(out)])
        assert code == 0
        assert captured.out == ""
        report = json.loads(out.read_text())
        jsonschema.validate(report, SCHEMA)
        assert report["config"]["output_path"] == str(out)

    def test_csv_to_file(self, capsys, tmp_path):
        out = tmp_path / "traj.csv"
        code, captured = run_cli(
            capsys, ["flow", *CUBIC, "--x0", "0.1", "--format", "csv", "--out", str(out)]
        )
        assert code == 0
        assert captured.out == ""
        rows = list(csv.reader(io.StringIO(out.read_text())))
        assert rows[0] == ["t", "y1", "F", "|W|"]


@pytest.mark.skipif(shutil.which("germflow") is None, reason="console script not installed")
class TestConsoleScript:
    def test_version(self):
        proc = subprocess.run(["germflow", "--version"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert proc.stdout.strip().startswith("germflow ")

    def test_check_subprocess(self):
        proc = subprocess.run(
            ["germflow", "check", *CUBIC, "--r", "1"], capture_output=True, text=True
        )
        assert proc.returncode == 0
        report = json.loads(proc.stdout)
        assert report["verdict"] == "PASS"


def test_module_entrypoint_matches_script():
    proc = subprocess.run(
        [sys.executable, "-m", "germflow.cli", "--version"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "germflow 0.1.0"

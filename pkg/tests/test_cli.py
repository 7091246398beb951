import json
import subprocess
import sys

import pytest

from volterra2d import parse_system
from volterra2d.cli import CSV_HEADER, run


def read_csv(path):
    lines = path.read_text().strip().splitlines()
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


class TestCheckCommand:
    def test_demo1_periodic_passes(self, example1_path, tmp_path):
        out = tmp_path / "report.json"
        code = run(["check", "--config", str(example1_path),
                    "--mode", "periodic", "--out", str(out)])
        assert code == 0
        report = json.loads(out.read_text())
        q = report["report"]["quantities"]
        assert q["gain_x"] == -0.5
        assert q["bound_x"] == pytest.approx(3.1639534, abs=1e-7)

    def test_demo1_asymptotic_fails(self, example1_path, tmp_path):
        out = tmp_path / "report.json"
        code = run(["check", "--config", str(example1_path),
                    "--mode", "asymptotic", "--out", str(out)])
        assert code == 2
        report = json.loads(out.read_text())
        assert report["report"]["quantities"]["product_h"] == 3.0

    def test_demo2_modes(self, example2_path, tmp_path):
        assert run(["check", "--config", str(example2_path),
                    "--mode", "periodic",
                    "--out", str(tmp_path / "a.json")]) == 2
        assert run(["check", "--config", str(example2_path),
                    "--mode", "asymptotic",
                    "--out", str(tmp_path / "b.json")]) == 0

    def test_report_prints_to_stdout_by_default(self, example1_path, capsys):
        assert run(["check", "--config", str(example1_path),
                    "--mode", "periodic"]) == 0
        parsed = json.loads(capsys.readouterr().out)
        assert parsed["command"] == "check"

    def test_config_echo_round_trips(self, example2_path, tmp_path):
        out = tmp_path / "report.json"
        run(["check", "--config", str(example2_path), "--mode", "asymptotic",
             "--out", str(out)])
        echo = json.loads(out.read_text())["config"]
        assert parse_system(echo) == parse_system(example2_path.read_text())


class TestSimulateCommand:
    def test_csv_row_count_and_header(self, example2_path, tmp_path):
        csv_path = tmp_path / "table.csv"
        code = run(["simulate", "--config", str(example2_path),
                    "--steps", "7", "--csv", str(csv_path),
                    "--out", str(tmp_path / "r.json")])
        assert code == 0
        header, rows = read_csv(csv_path)
        assert header == CSV_HEADER
        assert len(rows) == 8
        assert rows[0][0] == "0"
        # residual columns populated for every step but the last
        assert rows[0][7] != "" and rows[-1][7] == ""

    def test_negative_steps_rejected(self, example2_path):
        assert run(["simulate", "--config", str(example2_path),
                    "--steps", "-1", "--out", "/dev/null"]) == 1


class TestSolveCommands:
    def test_solve_periodic(self, example1_path, tmp_path):
        out = tmp_path / "report.json"
        csv_path = tmp_path / "table.csv"
        code = run(["solve-periodic", "--config", str(example1_path),
                    "--out", str(out), "--csv", str(csv_path)])
        assert code == 0
        report = json.loads(out.read_text())["report"]
        assert report["converged"]
        assert report["x"] == [0.0, 0.0]
        _, rows = read_csv(csv_path)
        assert len(rows) == 2

    def test_solve_periodic_wrong_regime_exits_2(self, example2_path):
        assert run(["solve-periodic", "--config", str(example2_path),
                    "--out", "/dev/null"]) == 2

    def test_solve_asymptotic(self, example2_path, tmp_path):
        out = tmp_path / "report.json"
        csv_path = tmp_path / "table.csv"
        code = run(["solve-asymptotic", "--config", str(example2_path),
                    "--horizon", "60", "--c1", "1", "--c2", "1",
                    "--out", str(out), "--csv", str(csv_path)])
        assert code == 0
        report = json.loads(out.read_text())["report"]
        assert report["converged"]
        header, rows = read_csv(csv_path)
        assert len(rows) == 61
        assert header == CSV_HEADER
        # u, v, and bound columns populated in asymptotic mode
        assert rows[3][3] != "" and rows[3][4] != "" and rows[3][9] != ""

    def test_horizon_from_config(self, example2_path, tmp_path):
        csv_path = tmp_path / "table.csv"
        code = run(["solve-asymptotic", "--config", str(example2_path),
                    "--csv", str(csv_path), "--out", "/dev/null"])
        assert code == 0
        _, rows = read_csv(csv_path)
        assert len(rows) == 61  # config carries horizon 60

    def test_default_horizon_when_unspecified(self, example2_path, tmp_path):
        config = json.loads(example2_path.read_text())
        del config["horizon"]
        path = tmp_path / "nohorizon.json"
        path.write_text(json.dumps(config))
        csv_path = tmp_path / "table.csv"
        code = run(["solve-asymptotic", "--config", str(path),
                    "--csv", str(csv_path), "--out", str(tmp_path / "r.json")])
        assert code == 0
        _, rows = read_csv(csv_path)
        # smallest horizon whose decay envelope sinks below 1e-12:
        # 2 * tail_mass_a * e^-n <= 1e-12 first holds at n = 30
        assert len(rows) == 31

    def test_verify_asymptotic(self, example2_path, tmp_path):
        code = run(["verify", "--config", str(example2_path),
                    "--mode", "asymptotic", "--out", str(tmp_path / "r.json")])
        assert code == 0
        body = json.loads((tmp_path / "r.json").read_text())["report"]
        assert body["verification"]["passed"]

    def test_verify_periodic(self, example1_path, tmp_path):
        code = run(["verify", "--config", str(example1_path),
                    "--mode", "periodic", "--out", str(tmp_path / "r.json")])
        assert code == 0


class TestInputErrors:
    def test_missing_file(self, capsys):
        assert run(["check", "--config", "/nonexistent.json",
                    "--mode", "periodic"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_malformed_json(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        assert run(["check", "--config", str(bad), "--mode", "periodic"]) == 1
        assert "JSON" in capsys.readouterr().err

    def test_schema_violation_names_field(self, tmp_path, capsys):
        config = {
            "period": 2, "h": [1.0], "p": [0.0, 0.0],
            "kernel_a": {"type": "finite_lag", "weights": [[1.0]]},
            "kernel_b": {"type": "finite_lag", "weights": [[1.0]]},
            "f": {"kind": "sin", "amplitude": 1.0, "frequency": 1.0},
            "g": {"kind": "sin", "amplitude": 1.0, "frequency": 1.0}}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(config))
        assert run(["check", "--config", str(path), "--mode", "periodic"]) == 1
        assert "h" in capsys.readouterr().err

    def test_unknown_subcommand(self, capsys):
        assert run(["frobnicate"]) == 1

    def test_seed_flag_accepted(self, example1_path, tmp_path):
        assert run(["check", "--config", str(example1_path),
                    "--mode", "periodic", "--seed", "7",
                    "--out", str(tmp_path / "r.json")]) == 0


def test_finite_lag_config_end_to_end(tmp_path):
    config = {
        "period": 2, "h": [0.5, 0.2], "p": [0.3, 0.4],
        "kernel_a": {"type": "finite_lag",
                     "weights": [[0.4, 0.1], [0.2, -0.1]]},
        "kernel_b": {"type": "finite_lag",
                     "weights": [[0.3, 0.0], [0.1, 0.2]]},
        "f": {"kind": "sin", "amplitude": 1.0, "frequency": 1.0},
        "g": {"kind": "cos", "amplitude": 0.5, "frequency": 1.0}}
    path = tmp_path / "lag.json"
    path.write_text(json.dumps(config))
    assert run(["check", "--config", str(path), "--mode", "periodic",
                "--out", str(tmp_path / "c.json")]) == 0
    assert run(["solve-periodic", "--config", str(path),
                "--out", str(tmp_path / "s.json")]) == 0
    report = json.loads((tmp_path / "s.json").read_text())["report"]
    assert report["converged"]
    assert run(["simulate", "--config", str(path), "--steps", "6",
                "--out", str(tmp_path / "t.json")]) == 0


def test_bad_history_value_reports_field_path(tmp_path, capsys, example1_path):
    config = json.loads(example1_path.read_text())
    config["history"] = {"window": [[0.0, None]]}
    path = tmp_path / "badhist.json"
    path.write_text(json.dumps(config))
    assert run(["simulate", "--config", str(path), "--steps", "2",
                "--out", "/dev/null"]) == 1
    assert "history.window[0][1]" in capsys.readouterr().err


def test_console_entry_point(example1_path, tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "volterra2d.cli", "check",
         "--config", str(example1_path), "--mode", "periodic",
         "--out", str(tmp_path / "r.json")],
        capture_output=True, text=True)
    assert result.returncode == 0
    assert json.loads((tmp_path / "r.json").read_text())["report"]["passed"]

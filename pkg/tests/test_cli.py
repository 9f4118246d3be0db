"""End-to-end tests of the command-line surface."""

import json
import math

import numpy as np
import pytest
from typer.testing import CliRunner

from bell_timing.app import cmd_simulate
from bell_timing.cli import app
from bell_timing.config_model import build_config
from bell_timing.utils.simulation import read_run_record

runner = CliRunner()

SQRT2 = math.sqrt(2.0)


def _json(args):
    result = runner.invoke(app, [*args, "--format", "json"])
    assert result.exit_code == 0, result.output
    return json.loads(result.stdout)


def _rows_by(rows, key):
    return {row[key]: row for row in rows}


def test_qm_table():
    document = _json(["qm-table"])
    assert document["command"] == "qm-table"
    checks = _rows_by(document["results"]["inequalities"], "name")
    assert checks["CH sum"]["value"] == pytest.approx(0.5 * (1 + SQRT2), abs=1e-12)
    assert checks["CH sum"]["satisfied"] is False
    assert checks["CHSH S"]["value"] == pytest.approx(2 * SQRT2, abs=1e-12)


def test_qm_table_other_quad():
    document = _json(["qm-table", "--quad", f"0,{math.pi / 3},{math.pi / 6},{math.pi / 2}"])
    assert document["config_echo"]["quad"][1] == pytest.approx(math.pi / 3)


def test_equal_settings_are_a_config_error():
    result = runner.invoke(app, ["qm-table", "--quad", "0,0,0.1,0.2"])
    assert result.exit_code == 2
    assert "Error" in result.output


def test_json_output_is_deterministic():
    first = runner.invoke(app, ["simulate", "--model", "clock", "--pairs", "5000", "--seed", "3", "--format", "json"])
    second = runner.invoke(app, ["simulate", "--model", "clock", "--pairs", "5000", "--seed", "3", "--format", "json"])
    assert first.exit_code == 0, first.output
    assert first.stdout == second.stdout


def test_simulate_constant_model():
    document = _json(["simulate", "--model", "constant", "--pairs", "40000", "--seed", "1"])
    estimates = _rows_by(document["results"]["estimates"], "quantity")
    for name in ("E(alpha,beta)", "E(alpha,beta')", "E(alpha',beta)", "E(alpha',beta')"):
        row = estimates[name]
        assert abs(row["value"]) <= 5 * row["std_error"]
    assert all(row["within"] for row in document["results"]["exact_comparison"])


def test_simulate_writes_run_record(tmp_path):
    path = tmp_path / "run.tsv"
    result = runner.invoke(app, ["simulate", "--model", "malus", "--pairs", "1000", "--record", str(path)])
    assert result.exit_code == 0, result.output
    assert path.read_text().startswith("# bell-timing run record")


def test_record_is_the_reported_run(tmp_path):
    path = tmp_path / "run.tsv"
    args = ["simulate", "--model", "clock", "--pairs", "3000", "--seed", "4", "--record", str(path)]
    result = runner.invoke(app, args)
    assert result.exit_code == 0, result.output
    report = cmd_simulate(build_config(None, {"model": "clock", "n_pairs": 3000, "seed": 4}))
    recorded = read_run_record(path)
    for column in report.run.frame.columns:
        np.testing.assert_array_equal(recorded.frame[column].to_numpy(), report.run.frame[column].to_numpy())


def test_unknown_model_exits_with_error():
    result = runner.invoke(app, ["simulate", "--model", "bohm"])
    assert result.exit_code == 2
    assert "bohm" in result.output


def test_worlds():
    document = _json(["worlds"])
    worlds = _rows_by(document["results"]["worlds"], "world")
    assert worlds["B"]["ch_value"] == pytest.approx(0.5 * (1 + SQRT2), abs=1e-12)
    assert worlds["B"]["violates_ch"] is True
    assert worlds["C"]["ch_value"] == pytest.approx(-0.1982, abs=1e-4)
    assert worlds["C"]["chsh_bound"] == 8.0
    assert worlds["D"]["chsh_bound"] == pytest.approx(32 / 9, abs=1e-12)
    assert worlds["D"]["violates_chsh"] is False
    assert len(document["annotations"]) >= 2


def test_single_world():
    document = _json(["worlds", "--world", "D"])
    assert [row["world"] for row in document["results"]["worlds"]] == ["D"]


def test_worlds_on_simulated_data():
    document = _json(["worlds", "--data", "simulated", "--model", "qm", "--pairs", "100000", "--world", "B"])
    (row,) = document["results"]["worlds"]
    assert row["violates_chsh"] is True


def test_oracle():
    document = _json(["oracle", "--samples", "20000"])
    extremes = document["results"]["strategy_extremes"][0]
    assert extremes["s_abs_max"] == 2.0
    assert (extremes["ch_sum_min"], extremes["ch_sum_max"]) == (0.0, 1.0)
    assert all(row["worst_excursion"] <= 1e-12 for row in document["results"]["identity"])
    corner_values = [row["value"] for row in document["results"]["corners"]]
    assert min(corner_values) == -1.0 and max(corner_values) == 0.0


@pytest.mark.parametrize(
    "model, total_time, verdict",
    [
        ("malus", "1", "refuted-by-experiments"),
        ("clock", "1", "not-yet-refuted"),
        ("clock", "2", "not-yet-refuted"),
        ("clock", "4", "not-yet-refuted"),
    ],
)
def test_admissibility(model, total_time, verdict):
    document = _json(["admissibility", "--model", model, "--time", total_time])
    assert document["results"]["summary"][0]["verdict"] == verdict


def test_admissibility_with_tiny_tolerance():
    document = _json(["admissibility", "--model", "malus", "--tol", "1e-12"])
    assert document["results"]["summary"][0]["verdict"] == "refuted-by-experiments"


def test_admissibility_refuses_data_sources():
    result = runner.invoke(app, ["admissibility", "--model", "qm"])
    assert result.exit_code == 2
    assert "no direct way" in result.output


def test_sweep_csv():
    result = runner.invoke(app, ["sweep", "--points", "5", "--format", "csv"])
    assert result.exit_code == 0, result.output
    lines = result.stdout.strip().splitlines()
    assert lines[0] == "# sweep"
    assert lines[1].startswith("theta,ch_sum")
    assert len(lines) == 2 + 5


def test_config_file(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({"model": "clock", "format": "json"}))
    result = runner.invoke(app, ["admissibility", "--config", str(path)])
    assert result.exit_code == 0, result.output
    assert json.loads(result.stdout)["config_echo"]["model"] == "clock"


def test_repro_passes():
    result = runner.invoke(app, ["repro", "--pairs", "100000", "--strict", "--format", "json"])
    assert result.exit_code == 0, result.output
    document = json.loads(result.stdout)
    assert all(row["passed"] for row in document["results"]["checks"])
    assert document["results"]["summary"][0]["failed"] == 0

import csv
import json
import math

import numpy as np
import pytest

from app.cli import COLUMNS, EXIT_CONFIG, EXIT_OK, run_cli, run_verification
from app.models.pointprocess import PointConfiguration, Window
from app.services.pointprocess import sample_poisson


def read_rows(path):
    lines = path.read_text().splitlines()
    return lines[:2], list(csv.DictReader(lines[2:]))


def test_sample_writes_the_text_format(tmp_path):
    out = tmp_path / "points.txt"
    assert run_cli(["sample", "--d", "2", "--t", "30", "--seed", "5", "--out", str(out)]) == EXIT_OK
    config = PointConfiguration.from_text(out.read_text())
    expected = sample_poisson(Window.cube(2), 30.0, 5)
    assert np.array_equal(config.points, expected.points)


def test_sample_text_carries_a_provenance_header(tmp_path):
    out = tmp_path / "points.txt"
    assert run_cli(["sample", "--d", "1", "--t", "20", "--seed", "4", "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "# rgc-dim v1.0.0 seed=4"
    assert json.loads(lines[1][len("# config="):])["t"] == 20.0
    dim_out = tmp_path / "dim.csv"
    assert run_cli(["dim", "--points", str(out), "--r", "0.1", "--out", str(dim_out)]) == EXIT_OK
    _, rows = read_rows(dim_out)
    values = {row["statistic"]: row["value"] for row in rows}
    assert int(values["point_count"]) == sample_poisson(Window.interval(), 20.0, 4).n


def test_dimension_of_a_supplied_configuration(tmp_path):
    points = tmp_path / "points.txt"
    points.write_text("1 10.0 0 0 4\n0.1\n0.2\n0.25\n0.6\n")
    out = tmp_path / "dim.csv"
    assert run_cli(["dim", "--points", str(points), "--r", "0.2", "--out", str(out)]) == EXIT_OK
    _, rows = read_rows(out)
    values = {row["statistic"]: row["value"] for row in rows}
    assert values == {"point_count": "4", "vietoris_rips_dimension": "2"}


def test_fvector_rows(tmp_path):
    out = tmp_path / "f.csv"
    assert run_cli(["fvector", "--d", "2", "--t", "40", "--rho", "2", "--complex", "cech", "--n-max", "2",
                    "--out", str(out)]) == EXIT_OK
    _, rows = read_rows(out)
    assert [row["statistic"] for row in rows] == ["f_0", "f_1", "f_2"]
    assert int(rows[0]["value"]) == sample_poisson(Window.cube(2), 40.0, 0).n


def test_csv_header_and_columns(tmp_path):
    out = tmp_path / "gumbel.csv"
    assert run_cli(["gumbel", "--t", "1e5", "--rho", "132.5", "--x=-1,0,1", "--out", str(out)]) == EXIT_OK
    header, rows = read_rows(out)
    assert header[0] == "# rgc-dim v1.0.0 seed=0"
    assert header[1].startswith("# config=")
    assert json.loads(header[1][len("# config="):])["rho"] == 132.5
    assert out.read_text().splitlines()[2] == ",".join(COLUMNS)
    assert len(rows) == 2 + 3 * 3
    assert rows[0]["t"] == "100000" and rows[0]["r_t"] == ""


def test_gumbel_with_trials_reports_the_empirical_cdf(tmp_path):
    out = tmp_path / "gumbel.csv"
    assert run_cli(["gumbel", "--t", "1e4", "--rho", "84.8", "--x=-1,0", "--trials", "60", "--seed", "3",
                    "--out", str(out)]) == EXIT_OK
    _, rows = read_rows(out)
    by_name = {row["statistic"]: row for row in rows}
    assert float(by_name["gumbel_cdf[x=0]"]["value"]) == pytest.approx(math.exp(-1.0))
    empirical = by_name["empirical_cdf[x=0]"]
    assert empirical["trials"] == "60" and empirical["seed"] == "3"
    assert 0.0 <= float(empirical["value"]) <= 1.0
    assert float(by_name["empirical_cdf[x=-1]"]["value"]) <= float(empirical["value"])
    assert "standardized_mean" in by_name


def test_json_output(tmp_path):
    out = tmp_path / "predict.json"
    assert run_cli(["predict", "--regime", "power_sparse", "--t", "1e4", "--rho", "1e-4", "--format", "json",
                    "--out", str(out)]) == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["config"]["tool"] == "rgc-dim"
    (record,) = payload["results"]
    assert record["k"] == 1
    assert record["prediction"] == pytest.approx(1 - math.exp(-1))


def test_experiment_output_is_byte_identical_across_workers(tmp_path):
    args = ["experiment", "--d", "1", "--t", "200,400", "--rho", "3", "--trials", "12", "--seed", "9", "--k", "8"]
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli(args + ["--workers", "1", "--out", str(first)]) == EXIT_OK
    assert run_cli(args + ["--workers", "2", "--out", str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    header, rows = read_rows(first)
    assert header[0] == "# rgc-dim v1.0.0 seed=9"
    assert {row["t"] for row in rows} == {"200", "400"}
    assert any(row["statistic"] == "moment_1" for row in rows)


def test_config_file_is_overridden_by_flags(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"rho": 2.0, "k": [3], "trials": 0}))
    out = tmp_path / "pq.csv"
    assert run_cli(["pq", "--config", str(config), "--k", "4", "--out", str(out)]) == EXIT_OK
    _, rows = read_rows(out)
    assert [row["statistic"] for row in rows] == ["p_exact[k=4]", "q_upper[k=4]"]


def test_pq_reports_checks(capsys):
    assert run_cli(["pq", "--rho", "2", "--k", "2", "--trials", "4000", "--seed", "3"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "p_hat[k=2]" in out
    assert "p_check[k=2]" in out


def test_invalid_config_value_names_the_key(tmp_path, caplog):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"t": [100.0], "rho": 2.0, "trials": 0}))
    assert run_cli(["experiment", "--config", str(config)]) == EXIT_CONFIG
    assert "'trials'" in caplog.text


@pytest.mark.parametrize("argv", [
    ["gumbel", "--t", "5", "--rho", "5"],
    ["dim", "--t", "10", "--r", "0.1", "--complex", "alpha"],
    ["predict", "--regime", "dense", "--t", "10"],
    ["experiment", "--t", "100", "--rho", "2", "--trials", "3", "--config", "/nonexistent/config.json"],
    ["gumbel", "--t", "abc"],
])
def test_configuration_errors_exit_with_two(argv):
    assert run_cli(argv) == EXIT_CONFIG


def test_unknown_config_key(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"rho": 2.0, "k": [3], "colour": "blue"}))
    assert run_cli(["pq", "--config", str(config)]) == EXIT_CONFIG


def test_verify_passes(capsys):
    assert run_cli(["verify", "--trials", "5", "--seed", "1"]) == EXIT_OK
    out = capsys.readouterr().out.strip().splitlines()
    assert out[0] == "# rgc-dim v1.0.0 seed=1"
    lines = [line for line in out if not line.startswith("#")]
    assert len(lines) >= 8
    assert all(line.startswith("PASS") for line in lines)


@pytest.mark.slow
@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_verification_suite_at_full_size(seed):
    checks = run_verification(200, seed)
    assert all(check["passed"] for check in checks), [c for c in checks if not c["passed"]]

"""
命令行入口测试：退出码、单行JSON结果与输出文件
"""
import json
import math

import numpy as np
import pytest

from hpw.database.artifacts import field_from_json, load_field, read_csv, read_jsonl
from hpw.main import main
from hpw.utils.response import CalibrationError

from hpw.tests.conftest import SMALL_BOX, SMALL_CUTOFF, small_config_overrides


def _run(capsys, argv):
    code = main(argv)
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines, "命令没有输出结果记录"
    return code, json.loads(lines[-1])


def _small_args(tmp_path, *extra):
    args = []
    for item in small_config_overrides(tmp_path) + list(extra):
        args += ["--set", item]
    return args


# 校准测试用的Λ网格：每个几何面板6个节点
CALIBRATION_GRID = ["lambda_grid.nodes=32", "lambda_grid.origin_panel_nodes=4"]


def test_missing_config_is_a_usage_error(capsys, tmp_path):
    code, record = _run(capsys, ["verify", "--config", str(tmp_path / "absent.json")])
    assert code == 2
    assert record["success"] is False
    assert record["error_code"] == "usage_error"
    assert record["exit_code"] == 2


def test_unknown_command_and_bad_override(capsys, tmp_path):
    code, record = _run(capsys, ["explode"])
    assert code == 2 and record["error_code"] == "usage_error"
    code, record = _run(capsys, ["verify", "--set", "cutoff"])
    assert code == 2 and record["error_code"] == "usage_error"


def test_verify_hermite_passes_and_writes_report(capsys, tmp_path):
    code, record = _run(capsys, ["verify", "--suite", "hermite"] + _small_args(tmp_path))
    assert code == 0, record
    assert record["success"] is True and record["data"]["failed"] == 0
    rows = read_jsonl(tmp_path / "verify_hermite.jsonl")
    assert rows and all(row["passed"] for row in rows)
    assert {row["run_id"] for row in rows} == {record["run_id"]}


def test_verify_schatten_writes_report(capsys, tmp_path):
    code, record = _run(capsys, ["verify", "--suite", "schatten", "--seed", "9"] + _small_args(tmp_path))
    assert code == 0, record
    rows = read_jsonl(tmp_path / "verify_schatten.jsonl")
    assert {row["name"] for row in rows} >= {"frobenius_identity", "onb_power_sum_bound", "frame_bounds_onb"}
    assert all(row["seed"] == 9 for row in rows)


def test_verify_fourier_without_calibration_is_an_environment_error(capsys, tmp_path):
    code, record = _run(capsys, ["verify", "--suite", "fourier"] + _small_args(tmp_path))
    assert code == 3
    assert record["error_code"] == "sidecar_error"
    assert not (tmp_path / "verify_fourier.jsonl").exists()


def test_calibration_failure_exit_code(capsys, tmp_path, monkeypatch):
    def failing(*args, **kwargs):
        raise CalibrationError("残差过大")

    monkeypatch.setattr("hpw.api.calibrate.calibrate", failing)
    code, record = _run(capsys, ["calibrate"] + _small_args(tmp_path))
    assert code == 1
    assert record["error_code"] == "calibration_failed"
    assert not (tmp_path / "calibration.json").exists()


def test_calibrate_is_reproducible_and_checked_by_verify(capsys, tmp_path):
    args = ["calibrate"] + _small_args(tmp_path, *CALIBRATION_GRID)
    code, record = _run(capsys, args)
    assert code == 0, record
    sidecar = tmp_path / "calibration.json"
    first = sidecar.read_bytes()
    assert abs(record["data"]["plancherel_c"] / record["data"]["analytic_reference"] - 1.0) < 0.1

    code, _ = _run(capsys, args)
    assert code == 0
    assert sidecar.read_bytes() == first

    # 截断阶改变后旁路文件不再适用
    mismatched = ["verify", "--suite", "fourier"] + _small_args(tmp_path, *CALIBRATION_GRID, "cutoff=6")
    code, record = _run(capsys, mismatched)
    assert code == 3
    assert any(err["field"] == "cutoff" for err in record["errors"])


def test_sweep_over_dilations(capsys, tmp_path):
    extra = [
        "inequality.p=[1.5]",
        "inequality.beta_offsets=[1.0]",
        "inequality.gamma=[1.0]",
        "family.dilations=[1.0,2.0]",
    ]
    code, record = _run(capsys, ["sweep"] + _small_args(tmp_path, *extra))
    assert code == 0, record
    assert record["data"]["rows"] == 2 and record["data"]["skipped"] == 0
    rows = read_csv(tmp_path / "sweep.csv")
    assert [float(row["dilation"]) for row in rows] == [1.0, 2.0]
    assert all(abs(float(row["ratio_drift"])) <= 1e-3 for row in rows)
    assert len(read_jsonl(tmp_path / "sweep.jsonl")) == 2
    for axis in ("p", "beta", "gamma"):
        assert len(read_csv(tmp_path / f"sweep_plot_{axis}.csv")) == 1
    assert len(read_csv(tmp_path / "tails.csv")) == 7
    baseline = json.loads((tmp_path / "sweep_baseline.json").read_text(encoding="utf-8"))
    assert baseline["max_dilation_drift"] <= 1e-3
    assert record["data"]["fields"] == 2
    stored = load_field(tmp_path / "fields" / "member0.hpwf")
    assert stored.cutoff == SMALL_CUTOFF and stored.size > 0
    assert stored.ops[0].meta.box == SMALL_BOX
    mirrored = field_from_json((tmp_path / "fields" / "member0.json").read_text(encoding="utf-8"))
    assert all(np.array_equal(a.entries, b.entries) for a, b in zip(stored.ops, mirrored.ops))
    assert not (tmp_path / "fields" / "member0_r2.hpwf").exists()


def test_sweep_without_admissible_configs(capsys, tmp_path):
    code, record = _run(capsys, ["sweep"] + _small_args(tmp_path, "inequality.beta=[0.1]"))
    assert code == 2
    assert record["error_code"] == "usage_error"


def test_estimate_with_unit_budget(capsys, tmp_path):
    code, record = _run(capsys, ["estimate", "--seed", "4"] + _small_args(tmp_path, "optimizer.budget=1"))
    assert code == 0, record
    assert record["data"]["evaluations"] == 1
    payload = json.loads((tmp_path / "estimate.json").read_text(encoding="utf-8"))
    assert payload["budget"] == 1 and len(payload["trajectory"]) == 1
    assert payload["seed"] == 4
    assert payload["min_ratio"] == pytest.approx(record["data"]["min_ratio"])


def test_estimate_trajectory_is_reproducible(capsys, tmp_path):
    args = ["estimate", "--seed", "4"] + _small_args(tmp_path, "optimizer.budget=2")
    code, first_record = _run(capsys, args)
    assert code == 0, first_record
    first = json.loads((tmp_path / "estimate.json").read_text(encoding="utf-8"))
    code, second_record = _run(capsys, args)
    assert code == 0
    second = json.loads((tmp_path / "estimate.json").read_text(encoding="utf-8"))
    assert first["trajectory"] == second["trajectory"]
    assert first["metadata"]["x0"] == second["metadata"]["x0"]
    assert first_record["data"]["min_ratio"] == second_record["data"]["min_ratio"]


def test_estimate_is_no_worse_than_sweep(capsys, tmp_path):
    shared = ["inequality.p=[1.5]", "inequality.beta_offsets=[1.0]", "inequality.gamma=[1.0]"]
    code, record = _run(capsys, ["sweep"] + _small_args(tmp_path, *shared))
    assert code == 0, record
    rows = read_csv(tmp_path / "sweep.csv")
    assert all(abs(float(row["ratio_drift"])) <= 1e-3 for row in rows)
    sweep_min = min(float(row["ratio"]) for row in rows)

    # 起点取扫描成员 a=0.1, b=1
    start = f"optimizer.x0=[{math.log(0.1)!r},0.0]"
    code, record = _run(capsys, ["estimate"] + _small_args(tmp_path, "optimizer.budget=3", start))
    assert code == 0, record
    payload = json.loads((tmp_path / "estimate.json").read_text(encoding="utf-8"))
    assert payload["trajectory"][0]["ratio"] == pytest.approx(sweep_min, rel=1e-9)
    assert payload["min_ratio"] <= sweep_min * (1.0 + 1e-9)

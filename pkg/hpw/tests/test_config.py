"""
运行配置与环境配置测试
"""
import json

import pytest
from pydantic import ValidationError

from hpw.config.run_config import (
    apply_overrides,
    inequality_grid,
    load_run_config,
    parse_override,
    run_config_hash,
    run_identifier,
)
from hpw.config.settings import Settings
from hpw.utils.response import UsageError


def test_parse_override_reads_json_values():
    assert parse_override("cutoff=12") == ("cutoff", 12)
    assert parse_override("lambda_grid.lambda_max=6.5") == ("lambda_grid.lambda_max", 6.5)
    assert parse_override("inequality.p=[1.0,1.5]") == ("inequality.p", [1.0, 1.5])
    assert parse_override("output_dir=out/run=1") == ("output_dir", "out/run=1")
    with pytest.raises(UsageError):
        parse_override("cutoff")
    with pytest.raises(UsageError):
        parse_override("=3")


def test_apply_overrides_builds_nested_keys():
    data = {"lambda_grid": {"nodes": 32}, "cutoff": 4}
    result = apply_overrides(data, ["lambda_grid.nodes=128", "haar.nodes_v=40"])
    assert result == {"lambda_grid": {"nodes": 128}, "haar": {"nodes_v": 40}, "cutoff": 4}
    assert data["lambda_grid"]["nodes"] == 32
    with pytest.raises(UsageError):
        apply_overrides(data, ["cutoff.value=1"])


def test_load_run_config_from_file_with_overrides(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"cutoff": 10, "output_dir": "from_file"}), encoding="utf-8")
    cfg = load_run_config(str(path), ["lambda_grid.nodes=32"], seed=5)
    assert cfg.cutoff == 10 and cfg.lambda_grid.nodes == 32 and cfg.seed == 5
    assert cfg.output_dir == "from_file"
    assert load_run_config(str(path), output_dir=str(tmp_path)).output_dir == str(tmp_path)
    assert cfg.gh_count == 2 * 10 + 24


def test_load_run_config_errors(tmp_path):
    with pytest.raises(UsageError):
        load_run_config(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{", encoding="utf-8")
    with pytest.raises(UsageError):
        load_run_config(str(bad))
    bad.write_text("[]", encoding="utf-8")
    with pytest.raises(UsageError):
        load_run_config(str(bad))
    with pytest.raises(UsageError) as excinfo:
        load_run_config(None, ["cutoff=-1"])
    assert excinfo.value.errors[0]["field"] == "cutoff"
    with pytest.raises(UsageError):
        load_run_config(None, ["unknown_key=1"])
    with pytest.raises(UsageError):
        load_run_config(None, seed=-1)


def test_config_hash_ignores_output_dir():
    a = load_run_config(None, output_dir="a")
    b = load_run_config(None, output_dir="b")
    assert run_config_hash(a) == run_config_hash(b)
    assert run_identifier(a) == run_identifier(b)
    c = load_run_config(None, ["cutoff=12"], output_dir="a")
    assert run_config_hash(c) != run_config_hash(a)
    d = load_run_config(None, output_dir="a", seed=3)
    assert run_identifier(d).endswith("-3")


def test_inequality_grid_skips_inadmissible_betas():
    cfg = load_run_config(None, ['inequality.p=[1.5,1.0]', 'inequality.beta=[0.5,2.5]',
                                 'inequality.gamma=[1.0]'])
    admissible, skipped = inequality_grid(cfg, 4)
    assert [(c.p, c.beta) for c in admissible] == [(1.0, 2.5), (1.5, 2.5)]
    assert {(s["p"], s["beta"]) for s in skipped} == {(1.0, 0.5), (1.5, 0.5)}
    assert all(s["reason"] for s in skipped)


def test_default_inequality_grid_uses_offsets():
    cfg = load_run_config(None)
    admissible, skipped = inequality_grid(cfg, 4)
    assert not skipped
    assert len(admissible) == 4 * 3 * 3
    assert min(c.beta - c.beta_min for c in admissible) == pytest.approx(0.5)


def test_settings_validators():
    settings = Settings(HPW_ENV="Testing", LOG_LEVEL="debug", HPW_THREADS="3  # 本地")
    assert settings.HPW_ENV == "testing" and settings.LOG_LEVEL == "DEBUG"
    assert settings.thread_count == 3
    assert settings.logging_settings["level"] == "DEBUG"
    with pytest.raises(ValidationError):
        Settings(HPW_ENV="staging")
    with pytest.raises(ValidationError):
        Settings(LOG_LEVEL="LOUD")
    assert Settings(HPW_THREADS=0).thread_count >= 1

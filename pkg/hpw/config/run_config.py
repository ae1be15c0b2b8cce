"""
运行配置加载模块
单个JSON配置文件加命令行 --set 覆盖，命令行优先
"""
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from hpw.config.settings import get_settings
from hpw.models.inequality import InequalityConfig
from hpw.models.run_config import RunConfig
from hpw.utils.logger import Logger
from hpw.utils.response import InadmissibleConfigError, UsageError
from hpw.utils.run_id import config_hash, generate_run_id

logger = Logger(__name__)

# 不参与配置哈希的字段
OUTPUT_ONLY_FIELDS = ("output_dir",)


def parse_override(item: str) -> Tuple[str, Any]:
    """
    解析一条 key=value 覆盖，value按JSON解析，失败时当作字符串

    Raises:
        UsageError: 缺少等号或键为空
    """
    if "=" not in item:
        raise UsageError(f"覆盖项必须形如 key=value: {item}")
    key, raw = item.split("=", 1)
    key = key.strip()
    if not key:
        raise UsageError(f"覆盖项的键为空: {item}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def apply_overrides(data: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """
    按点分隔的键写入覆盖值

    Args:
        data: 原始配置字典（不会被修改）
        overrides: key=value 列表，例如 lambda_grid.nodes=128

    Returns:
        Dict[str, Any]: 覆盖后的新字典
    """
    result = json.loads(json.dumps(data))
    for item in overrides:
        key, value = parse_override(item)
        target = result
        parts = key.split(".")
        for part in parts[:-1]:
            node = target.get(part)
            if node is None:
                node = {}
                target[part] = node
            if not isinstance(node, dict):
                raise UsageError(f"覆盖路径{key}经过非对象字段{part}")
            target = node
        target[parts[-1]] = value
    return result


def _validation_errors(e: ValidationError):
    return [{"field": ".".join(str(x) for x in err["loc"]), "message": err["msg"]} for err in e.errors()]


def load_run_config(path: Optional[str], overrides: Sequence[str] = (), output_dir: Optional[str] = None,
                    seed: Optional[int] = None) -> RunConfig:
    """
    加载运行配置

    Args:
        path: JSON配置文件路径，None表示全部使用默认值
        overrides: --set 覆盖
        output_dir: --out
        seed: --seed

    Returns:
        RunConfig

    Raises:
        UsageError: 文件缺失、JSON无效或校验失败
    """
    data: Dict[str, Any] = {}
    if path is not None:
        file = Path(path)
        if not file.is_file():
            raise UsageError(f"配置文件不存在: {path}")
        try:
            data = json.loads(file.read_text(encoding="utf-8"))
        except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
            raise UsageError(f"配置文件不是合法JSON: {path}: {e}")
        if not isinstance(data, dict):
            raise UsageError("配置文件顶层必须是JSON对象")
    data = apply_overrides(data, overrides)
    if output_dir is not None:
        data["output_dir"] = output_dir
    elif "output_dir" not in data:
        data["output_dir"] = get_settings().HPW_OUTPUT_DIR
    if seed is not None:
        data["seed"] = seed
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as e:
        raise UsageError("运行配置校验失败", errors=_validation_errors(e))
    logger.debug("运行配置已加载", {"path": path, "overrides": list(overrides)})
    return cfg


def run_config_hash(cfg: RunConfig) -> str:
    return config_hash(cfg, exclude=OUTPUT_ONLY_FIELDS)


def run_identifier(cfg: RunConfig) -> str:
    return generate_run_id(run_config_hash(cfg), cfg.seed)


def inequality_grid(cfg: RunConfig, homogeneous_dimension: int) -> Tuple[List[InequalityConfig], List[Dict[str, Any]]]:
    """
    展开不等式参数网格

    Returns:
        (admissible, skipped): 可容许的InequalityConfig列表（按(p, β, γ)排序）与被跳过的组合及原因
    """
    admissible, skipped = [], []
    grid = cfg.inequality
    for p in sorted(grid.p):
        if grid.beta is not None:
            betas = sorted(grid.beta)
        else:
            betas = [homogeneous_dimension * (1.0 / p - 0.5) + o for o in sorted(grid.beta_offsets)]
        for beta in betas:
            for gamma in sorted(grid.gamma):
                try:
                    admissible.append(InequalityConfig.create(p, gamma, beta, homogeneous_dimension))
                except InadmissibleConfigError as e:
                    reason = e.errors[0]["message"] if e.errors else e.message
                    skipped.append({"p": p, "beta": beta, "gamma": gamma, "reason": reason})
    return admissible, skipped

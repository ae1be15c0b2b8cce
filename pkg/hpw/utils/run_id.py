"""
运行ID工具模块
由配置哈希与随机种子确定性地生成运行ID，便于结果追踪
"""
import hashlib
import json
from typing import Any, Dict, Iterable, Optional

from pydantic import BaseModel

from hpw.utils.response import CustomJSONEncoder

RUN_ID_PREFIX = "run"


def canonical_json(payload: Any) -> str:
    """
    规范化JSON文本（键排序、紧凑分隔符）

    Args:
        payload: 字典或pydantic模型

    Returns:
        str: 规范化文本
    """
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=True, cls=CustomJSONEncoder)


def config_hash(payload: Any, exclude: Optional[Iterable[str]] = None) -> str:
    """
    计算配置的sha256哈希

    Args:
        payload: 字典或pydantic模型
        exclude: 不参与哈希的顶层字段（例如输出目录）

    Returns:
        str: 十六进制哈希
    """
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    data: Dict[str, Any] = dict(payload)
    for key in exclude or ():
        data.pop(key, None)
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()


def generate_run_id(hash_hex: str, seed: int) -> str:
    """
    生成确定性的运行ID

    Args:
        hash_hex: 配置哈希
        seed: 随机种子

    Returns:
        str: 形如 run-<哈希前12位>-<种子> 的ID
    """
    return f"{RUN_ID_PREFIX}-{hash_hex[:12]}-{seed}"

"""
群相关的数据模型
"""
import hashlib
import json
import math
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class GroupKind(str, Enum):
    """群类型枚举"""
    HEISENBERG = "heisenberg"
    HTYPE = "htype"


class GroupSpec(BaseModel):
    """群描述的JSON文档模型"""
    model_config = ConfigDict(frozen=True, use_enum_values=True)

    kind: GroupKind = Field(..., description="群类型")
    n: int = Field(..., ge=1, description="第一层维数的一半")
    k: int = Field(1, ge=1, description="中心维数")
    j_generators: Optional[List[List[List[float]]]] = Field(
        None, description="H型群的反交换斜对称生成元 J_1..J_k"
    )

    @model_validator(mode="after")
    def check_shape(self) -> "GroupSpec":
        if self.kind == GroupKind.HEISENBERG.value:
            if self.k != 1:
                raise ValueError("Heisenberg群的中心维数k必须为1")
            if self.j_generators is not None:
                raise ValueError("Heisenberg群不接受j_generators")
        else:
            if self.j_generators is None:
                raise ValueError("H型群必须提供j_generators")
            arr = np.asarray(self.j_generators, dtype=float)
            expected = (self.k, 2 * self.n, 2 * self.n)
            if arr.shape != expected:
                raise ValueError(f"j_generators形状应为{expected}，实际为{arr.shape}")
        return self

    def descriptor_hash(self) -> str:
        """群描述的sha256哈希"""
        payload = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class GroupPoint(BaseModel):
    """群元素 x = (p, q, t)，坐标取在固定参考基下"""
    model_config = ConfigDict(frozen=True)

    p: Tuple[float, ...] = Field(..., description="𝔭方向坐标")
    q: Tuple[float, ...] = Field(..., description="𝔮方向坐标")
    t: Tuple[float, ...] = Field(..., description="中心坐标")

    @field_validator("p", "q", "t")
    @classmethod
    def check_finite(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if not all(math.isfinite(x) for x in v):
            raise ValueError("群元素坐标必须有限")
        return tuple(float(x) for x in v)

    @model_validator(mode="after")
    def check_dims(self) -> "GroupPoint":
        if len(self.p) != len(self.q) or len(self.p) == 0 or len(self.t) == 0:
            raise ValueError("p与q长度必须相同且非空，t必须非空")
        return self

    @property
    def n(self) -> int:
        return len(self.p)

    @property
    def k(self) -> int:
        return len(self.t)

    @property
    def v(self) -> np.ndarray:
        """第一层向量 (p, q)"""
        return np.array(self.p + self.q, dtype=float)

    @property
    def t_array(self) -> np.ndarray:
        return np.array(self.t, dtype=float)

    @classmethod
    def identity(cls, n: int, k: int) -> "GroupPoint":
        return cls(p=(0.0,) * n, q=(0.0,) * n, t=(0.0,) * k)

    @classmethod
    def from_arrays(cls, v: np.ndarray, t: np.ndarray) -> "GroupPoint":
        v = np.asarray(v, dtype=float).ravel()
        n = v.shape[0] // 2
        return cls(p=tuple(v[:n]), q=tuple(v[n:]), t=tuple(np.asarray(t, dtype=float).ravel()))


class HaarBox(BaseModel):
    """Haar积分的截断盒与逐轴节点数"""
    model_config = ConfigDict(frozen=True)

    radius_v: float = Field(14.0, gt=0, description="第一层坐标截断半径")
    radius_t: float = Field(8.0, gt=0, description="中心坐标截断半径")
    nodes_v: int = Field(96, ge=2, description="第一层每轴Gauss-Legendre节点数")
    nodes_t: int = Field(64, ge=2, description="中心每轴Gauss-Legendre节点数")

    def dilated(self, r: float) -> "HaarBox":
        """经δ_r映射后的盒（节点数不变）"""
        if r <= 0:
            raise ValueError("伸缩参数r必须为正")
        return self.model_copy(update={"radius_v": self.radius_v * r, "radius_t": self.radius_t * r * r})

    def refined(self, factor: int = 2) -> "HaarBox":
        """逐轴节点数加倍的同一盒"""
        return self.model_copy(update={"nodes_v": self.nodes_v * factor, "nodes_t": self.nodes_t * factor})

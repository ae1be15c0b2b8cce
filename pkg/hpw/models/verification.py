"""
验证套件的结果模型
"""
from enum import Enum
from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field


class SuiteName(str, Enum):
    """验证套件名称"""
    GROUP = "group"
    HERMITE = "hermite"
    FOURIER = "fourier"
    SCHATTEN = "schatten"
    HPW = "hpw"
    ALL = "all"

    @classmethod
    def get_description(cls, value: str) -> str:
        descriptions = {
            cls.GROUP.value: "群律、伸缩与Haar求积",
            cls.HERMITE.value: "Hermite函数与谱估计",
            cls.FOURIER.value: "群Fourier变换、Plancherel与反演",
            cls.SCHATTEN.value: "Schatten范数与框架",
            cls.HPW.value: "HPW不等式与谱尾部",
            cls.ALL.value: "全部套件",
        }
        return descriptions.get(value, "未知套件")

    @classmethod
    def needs_calibration(cls, value: str) -> bool:
        return value in (cls.FOURIER.value, cls.HPW.value, cls.ALL.value)


class CheckResult(BaseModel):
    """单项检查的结果"""
    model_config = ConfigDict(frozen=True)

    name: str = Field(..., description="检查名称")
    suite: str = Field(..., description="所属套件")
    passed: bool = Field(..., description="是否通过")
    value: Optional[float] = Field(None, description="观测值")
    threshold: Optional[float] = Field(None, description="阈值")
    detail: str = Field("", description="说明")
    metadata: Dict[str, Any] = Field(default_factory=dict, description="截断阶、网格等求积信息")

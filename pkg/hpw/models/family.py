"""
测试函数族相关的数据模型
"""
import math
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from hpw.models.group import GroupPoint


class GaussianParams(BaseModel):
    """高斯测试函数参数 f(x) = A·exp(−a‖v′‖² − b‖t′‖²)·e^{iμ·t′}，(v′,t′) = x₀⁻¹·x"""
    model_config = ConfigDict(frozen=True)

    amplitude: float = Field(1.0, description="幅度A")
    a: float = Field(0.1, gt=0, description="第一层衰减率")
    b: float = Field(1.0, gt=0, description="中心衰减率")
    modulation: Optional[List[float]] = Field(None, description="中心调制频率μ")
    translation: Optional[GroupPoint] = Field(None, description="左平移x₀")

    @field_validator("amplitude")
    @classmethod
    def check_amplitude(cls, v: float) -> float:
        if not math.isfinite(v) or v == 0.0:
            raise ValueError("幅度必须为有限非零实数")
        return v

    def dilate_params(self, r: float) -> "GaussianParams":
        """f∘δ_r 的参数（r > 0）"""
        if not r > 0:
            raise ValueError("伸缩参数必须为正")
        translation = None
        if self.translation is not None:
            x0 = self.translation
            translation = GroupPoint(
                p=tuple(c / r for c in x0.p), q=tuple(c / r for c in x0.q), t=tuple(c / (r * r) for c in x0.t)
            )
        modulation = None if self.modulation is None else [m * r * r for m in self.modulation]
        return self.model_copy(update={
            "a": self.a * r * r, "b": self.b * r ** 4, "modulation": modulation, "translation": translation
        })


def _default_calibration() -> List[GaussianParams]:
    base = GaussianParams(a=0.1, b=1.0)
    return [base.dilate_params(r) for r in (0.85, 1.0, 1.15)]


def _default_held_out() -> List[GaussianParams]:
    base = GaussianParams(a=0.1, b=1.0)
    return [
        base.dilate_params(0.9),
        base.dilate_params(1.1),
        base.model_copy(update={"amplitude": 2.5}),
        base.model_copy(update={"translation": GroupPoint(p=(0.8,), q=(0.0,), t=(0.0,))}),
        base.model_copy(update={"translation": GroupPoint(p=(0.0,), q=(-0.6,), t=(0.5,))}),
        base.model_copy(update={"translation": GroupPoint(p=(0.5,), q=(0.5,), t=(-0.4,))}),
        base.model_copy(update={"modulation": [0.5]}),
        base.model_copy(update={"modulation": [-1.0]}),
        base.model_copy(update={"a": 0.12, "b": 1.2}),
        base.model_copy(update={"a": 0.09, "b": 0.9, "modulation": [0.3]}),
    ]


class FamilySpec(BaseModel):
    """测试函数族规格"""
    model_config = ConfigDict(frozen=True)

    members: List[GaussianParams] = Field(
        default_factory=lambda: [GaussianParams(a=0.1, b=1.0)], description="扫描用的族成员"
    )
    dilations: List[float] = Field(default_factory=lambda: [1.0], description="伸缩轴 r，成员取 f∘δ_{1/r}")
    calibration: List[GaussianParams] = Field(default_factory=_default_calibration, description="校准族")
    held_out: List[GaussianParams] = Field(default_factory=_default_held_out, description="留出检验族")

    @field_validator("dilations")
    @classmethod
    def check_dilations(cls, v: List[float]) -> List[float]:
        if not v or any(not r > 0 for r in v):
            raise ValueError("伸缩轴必须非空且全为正")
        return v

    @field_validator("members")
    @classmethod
    def check_members(cls, v: List[GaussianParams]) -> List[GaussianParams]:
        if not v:
            raise ValueError("族成员不能为空")
        return v

"""
谱参数、谱算子与Fourier场的数据模型
"""
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator
from scipy.special import comb

from hpw.models.group import HaarBox


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


def basis_dimension(n: int, cutoff: int) -> int:
    """总阶数不超过cutoff的n元多重指标个数 binom(N+n, n)"""
    return int(comb(cutoff + n, n, exact=True))


class MultiIndex(BaseModel):
    """多重指标 α ∈ ℕ^n"""
    model_config = ConfigDict(frozen=True)

    entries: Tuple[int, ...] = Field(..., description="各分量")

    @field_validator("entries")
    @classmethod
    def check_nonnegative(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if len(v) == 0 or any(int(a) < 0 for a in v):
            raise ValueError("多重指标分量必须为非负整数且非空")
        return tuple(int(a) for a in v)

    @property
    def order(self) -> int:
        """|α| = Σα_j"""
        return sum(self.entries)

    @property
    def n(self) -> int:
        return len(self.entries)


class SpectralParameter(BaseModel):
    """谱参数 λ 及其频率 η(λ)、Pfaffian密度与适配基"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    lam: Tuple[float, ...] = Field(..., description="λ ∈ ℝ^k \\ {0}")
    eta: Tuple[float, ...] = Field(..., description="η_1(λ)..η_n(λ)")
    pfaffian: float = Field(..., gt=0, description="|Pf(λ)| = Π η_j(λ)")
    orientation: str = Field(..., description="基方向约定标签")
    basis: np.ndarray = Field(..., description="适配基矩阵，列依次为P_1..P_n, Q_1..Q_n")

    @field_validator("lam")
    @classmethod
    def check_nonzero(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if len(v) == 0 or not all(math.isfinite(x) for x in v) or all(x == 0.0 for x in v):
            raise ValueError("λ必须有限且非零")
        return tuple(float(x) for x in v)

    @field_validator("basis")
    @classmethod
    def freeze_basis(cls, v: np.ndarray) -> np.ndarray:
        return _readonly(np.asarray(v, dtype=float))

    @model_validator(mode="after")
    def check_eta(self) -> "SpectralParameter":
        if any(not (e > 0 and math.isfinite(e)) for e in self.eta):
            raise ValueError("所有η_j(λ)必须为正")
        product = float(np.prod(self.eta))
        if abs(product - self.pfaffian) > 1e-12 * max(product, 1.0):
            raise ValueError("pfaffian必须等于η各分量之积")
        size = 2 * len(self.eta)
        if self.basis.shape != (size, size):
            raise ValueError(f"适配基形状应为{(size, size)}")
        return self

    @field_serializer("basis")
    def serialize_basis(self, v: np.ndarray) -> List[List[float]]:
        return v.tolist()

    @property
    def n(self) -> int:
        return len(self.eta)

    @property
    def k(self) -> int:
        return len(self.lam)

    @property
    def lam_array(self) -> np.ndarray:
        return np.array(self.lam, dtype=float)

    @property
    def eta_array(self) -> np.ndarray:
        return np.array(self.eta, dtype=float)

    @property
    def lam_norm(self) -> float:
        return float(np.linalg.norm(self.lam))


class QuadratureSpec(BaseModel):
    """群Fourier变换所用的求积规格"""
    model_config = ConfigDict(frozen=True)

    box: HaarBox = Field(default_factory=HaarBox, description="(p,q,t)截断盒")
    hermite_nodes: int = Field(64, ge=1, description="u方向Gauss-Hermite节点数")

    def dilated(self, r: float) -> "QuadratureSpec":
        return self.model_copy(update={"box": self.box.dilated(r)})


class QuadratureMeta(BaseModel):
    """生成谱算子的求积元数据"""
    model_config = ConfigDict(frozen=True)

    cutoff: int
    box: HaarBox
    hermite_nodes: int
    node_count: int = Field(..., description="(p,q,t)采样点数")
    hs_capture: Optional[float] = Field(None, description="截断矩阵HS范数平方与精确HS恒等式之比")


class SpectralOperator(BaseModel):
    """F(f)(λ)在{Φ_α^{η(λ)}}基下的截断矩阵，M[γ, α] = ⟨F(f)(λ)Φ_α, Φ_γ⟩"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    sp: SpectralParameter
    cutoff: int = Field(..., ge=0)
    entries: np.ndarray
    meta: Optional[QuadratureMeta] = None

    @field_validator("entries")
    @classmethod
    def freeze_entries(cls, v: np.ndarray) -> np.ndarray:
        arr = np.asarray(v, dtype=complex)
        if not np.all(np.isfinite(arr)):
            raise ValueError("谱算子矩阵元素必须有限")
        return _readonly(arr)

    @model_validator(mode="after")
    def check_shape(self) -> "SpectralOperator":
        d = basis_dimension(self.sp.n, self.cutoff)
        if self.entries.shape != (d, d):
            raise ValueError(f"谱算子矩阵形状应为{(d, d)}，实际为{self.entries.shape}")
        return self

    @field_serializer("entries")
    def serialize_entries(self, v: np.ndarray) -> Dict[str, Any]:
        return {"re": v.real.tolist(), "im": v.imag.tolist()}

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    def with_entries(self, entries: np.ndarray) -> "SpectralOperator":
        """返回替换矩阵后的新算子（保留谱参数与元数据）"""
        return SpectralOperator(sp=self.sp, cutoff=self.cutoff, entries=entries, meta=self.meta)


class FourierField(BaseModel):
    """λ ↦ F(f)(λ) 在Λ求积节点上的离散化"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    nodes: List[SpectralParameter] = Field(default_factory=list)
    weights: np.ndarray = Field(default_factory=lambda: np.zeros(0))
    ops: List[SpectralOperator] = Field(default_factory=list)
    pfaffian_weighted: bool = Field(True, description="权重是否已包含|Pf(λ)|")
    descriptor_hash: str = Field("", description="群描述哈希")
    grid_spec: Dict[str, Any] = Field(default_factory=dict, description="Λ网格规格")

    @field_validator("weights")
    @classmethod
    def freeze_weights(cls, v: np.ndarray) -> np.ndarray:
        arr = np.asarray(v, dtype=float).ravel()
        if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
            raise ValueError("Fourier场权重必须为正")
        return _readonly(arr)

    @model_validator(mode="after")
    def check_aligned(self) -> "FourierField":
        if not (len(self.nodes) == len(self.ops) == self.weights.shape[0]):
            raise ValueError("节点、权重与算子数量必须一致")
        cutoffs = {op.cutoff for op in self.ops}
        if len(cutoffs) > 1:
            raise ValueError("同一Fourier场内截断阶必须一致")
        return self

    @field_serializer("weights")
    def serialize_weights(self, v: np.ndarray) -> List[float]:
        return v.tolist()

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def cutoff(self) -> Optional[int]:
        return self.ops[0].cutoff if self.ops else None

    def filter_nodes(self, mask) -> "FourierField":
        """按布尔掩码保留部分节点"""
        keep = [i for i, flag in enumerate(np.asarray(mask, dtype=bool)) if flag]
        return FourierField(
            nodes=[self.nodes[i] for i in keep],
            weights=self.weights[keep] if keep else np.zeros(0),
            ops=[self.ops[i] for i in keep],
            pfaffian_weighted=self.pfaffian_weighted,
            descriptor_hash=self.descriptor_hash,
            grid_spec=self.grid_spec,
        )

    def scaled_weights(self, factor: float) -> "FourierField":
        """所有权重乘以正常数"""
        if factor <= 0:
            raise ValueError("权重缩放因子必须为正")
        return self.model_copy(update={"weights": _readonly(self.weights * factor)})


class CalibrationConstants(BaseModel):
    """Plancherel常数C与反演常数κ及其拟合残差"""
    model_config = ConfigDict(frozen=True)

    plancherel_c: float = Field(..., gt=0, description="Plancherel常数C")
    inversion_kappa: float = Field(..., gt=0, description="反演常数κ")
    residual_c: float = Field(0.0, ge=0, description="C拟合的最大相对残差")
    residual_kappa: float = Field(0.0, ge=0, description="κ拟合的最大相对残差")
    analytic_reference: Optional[float] = Field(None, description="当前归一化下的解析值(2π)^{-(n+k)}")
    family_size: int = Field(0, ge=0, description="校准函数族大小")
    per_function: List[Dict[str, float]] = Field(default_factory=list, description="逐函数的拟合明细")

    @property
    def residual(self) -> float:
        return max(self.residual_c, self.residual_kappa)


@dataclass(frozen=True)
class LambdaGrid:
    """Λ上的求积网格（节点、测度权重与面板编号）"""
    lambdas: np.ndarray
    weights: np.ndarray
    panels: np.ndarray
    spec: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("lambdas", "weights", "panels"):
            arr = np.array(getattr(self, name), copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    @property
    def k(self) -> int:
        return self.lambdas.shape[1]

    def scaled(self, s: float) -> "LambdaGrid":
        """节点映射 λ → sλ，测度权重乘以 s^k"""
        if s <= 0:
            raise ValueError("缩放因子必须为正")
        spec = dict(self.spec)
        spec["scale"] = spec.get("scale", 1.0) * s
        return LambdaGrid(self.lambdas * s, self.weights * s ** self.k, self.panels, spec)

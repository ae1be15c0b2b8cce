"""
不等式检验相关的数据模型
"""
import math
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from hpw.utils.response import InadmissibleConfigError


def beta_lower_bound(p: float, homogeneous_dimension: int) -> float:
    """可容许性下界 Q(1/p − 1/2)"""
    return homogeneous_dimension * (1.0 / p - 0.5)


class InequalityConfig(BaseModel):
    """L^p不确定性不等式的参数 (p, β, γ)"""
    model_config = ConfigDict(frozen=True)

    p: float = Field(..., ge=1.0, lt=2.0, description="L^p指数，1 ≤ p < 2")
    gamma: float = Field(..., description="权重指数γ > 0")
    beta: float = Field(..., description="Fourier侧指数β > Q(1/p − 1/2)")
    homogeneous_dimension: int = Field(..., ge=2, description="齐次维数Q")

    @model_validator(mode="before")
    @classmethod
    def check_admissible(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        try:
            p = float(data["p"])
            gamma = float(data["gamma"])
            beta = float(data["beta"])
            q = int(data["homogeneous_dimension"])
        except (KeyError, TypeError, ValueError):
            return data
        if not (gamma > 0 and math.isfinite(gamma)):
            raise ValueError(f"γ必须为正: γ={gamma}")
        bound = beta_lower_bound(p, q) if p >= 1 else math.inf
        if not (beta > bound and math.isfinite(beta)):
            raise ValueError(f"β={beta}不满足β > Q(1/p − 1/2) = {bound:.6g}")
        return data

    @classmethod
    def create(cls, p: float, gamma: float, beta: float, homogeneous_dimension: int) -> "InequalityConfig":
        """构造并把校验失败转为InadmissibleConfigError"""
        try:
            return cls(p=p, gamma=gamma, beta=beta, homogeneous_dimension=homogeneous_dimension)
        except ValidationError as e:
            raise InadmissibleConfigError(
                f"不可容许的参数组合 (p={p}, β={beta}, γ={gamma})",
                errors=[{"field": ".".join(str(x) for x in err["loc"]) or "config", "message": err["msg"]}
                        for err in e.errors()],
            ) from e

    @property
    def p_conj(self) -> float:
        """共轭指数p′，p = 1时为∞"""
        return math.inf if self.p == 1.0 else self.p / (self.p - 1.0)

    @property
    def beta_min(self) -> float:
        return beta_lower_bound(self.p, self.homogeneous_dimension)


class HPWReport(BaseModel):
    """不等式两侧各量及其比值"""
    model_config = ConfigDict(frozen=True)

    p: float
    beta: float
    gamma: float
    norm_p: float = Field(..., ge=0, description="‖f‖_p")
    weighted_norm: float = Field(..., ge=0, description="‖|·|^γ f‖_p")
    fourier_value: float = Field(..., ge=0, description="p=1时为算子范数上确界，p>1时为积分（未开方）")
    lhs: float = Field(..., ge=0, description="‖f‖_p^{γ+β}")
    weight_term: float = Field(..., ge=0, description="‖|·|^γ f‖_p^β")
    fourier_term: float = Field(..., ge=0, description="Fourier侧因子（已取γ次幂）")
    ratio: float = Field(..., ge=0, description="weight_term·fourier_term / lhs")
    argmax_lambda: Optional[List[float]] = Field(None, description="p=1时取得上确界的λ节点")
    metadata: Dict[str, Any] = Field(default_factory=dict, description="截断阶、网格与求积信息")


class TailRow(BaseModel):
    """单个r上的谱尾部质量与无常数上界"""
    model_config = ConfigDict(frozen=True)

    r: float
    mass_below: float = Field(..., ge=0)
    mass_above: float = Field(..., ge=0)
    bound_below: float = Field(..., ge=0)
    bound_above: float = Field(..., ge=0)
    ratio_below: float = Field(..., ge=0)
    ratio_above: float = Field(..., ge=0)


class TailBoundReport(BaseModel):
    """谱尾部估计表与拟合常数（各r上比值的最大值）"""
    model_config = ConfigDict(frozen=True)

    p: float
    beta: float
    rows: List[TailRow]
    total_mass: float = Field(..., ge=0)
    fitted_below: float = Field(..., ge=0)
    fitted_above: float = Field(..., ge=0)
    metadata: Dict[str, Any] = Field(default_factory=dict)


class TrajectoryPoint(BaseModel):
    """优化轨迹上的一次求值"""
    model_config = ConfigDict(frozen=True)

    evaluation: int
    parameters: Dict[str, float]
    normalized_a: float = Field(..., description="伸缩归一化后的第一层衰减率")
    ratio: float


class EstimateReport(BaseModel):
    """常数估计结果"""
    model_config = ConfigDict(frozen=True)

    min_ratio: float
    argmin: Dict[str, float]
    trajectory: List[TrajectoryPoint]
    evaluations: int
    budget: int
    p: float
    beta: float
    gamma: float
    message: str = ""
    metadata: Dict[str, Any] = Field(default_factory=dict)

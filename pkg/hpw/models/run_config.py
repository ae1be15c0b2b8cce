"""
运行配置数据模型（单个JSON文件 + 命令行覆盖）
"""
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from hpw.models.family import FamilySpec
from hpw.models.group import GroupSpec, HaarBox
from hpw.models.spectral import QuadratureSpec

UINT64_MAX = 2 ** 64 - 1


class LambdaGridSpec(BaseModel):
    """Λ求积网格规格"""
    model_config = ConfigDict(frozen=True)

    lambda_min: float = Field(0.05, gt=0, description="几何面板起点")
    lambda_max: float = Field(8.0, gt=0, description="截断上界")
    nodes: int = Field(64, ge=2, description="节点总数（k=1为两侧之和，k≥2为径向节点数的两倍）")
    origin_panel_nodes: int = Field(6, ge=0, description="每侧(0, λ_min]内层面板节点数，0表示不设")
    angular_nodes: int = Field(8, ge=1, description="k≥2时的角向节点数")

    @model_validator(mode="after")
    def check_range(self) -> "LambdaGridSpec":
        if self.lambda_max <= self.lambda_min:
            raise ValueError("lambda_max必须大于lambda_min")
        if self.nodes // 2 <= self.origin_panel_nodes:
            raise ValueError("每侧节点数必须大于内层面板节点数")
        return self

    def refined(self, factor: int = 2) -> "LambdaGridSpec":
        return self.model_copy(update={
            "nodes": self.nodes * factor,
            "origin_panel_nodes": self.origin_panel_nodes * factor,
        })


class InequalityGridSpec(BaseModel):
    """不等式参数网格"""
    model_config = ConfigDict(frozen=True)

    p: List[float] = Field(default_factory=lambda: [1.0, 1.25, 1.5, 1.75], description="p取值")
    beta: Optional[List[float]] = Field(None, description="显式β取值；为空时按β_min(p)+偏移生成")
    beta_offsets: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0], description="β相对可容许下界的偏移")
    gamma: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0], description="γ取值")
    tail_r: List[float] = Field(
        default_factory=lambda: [0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0], description="尾部估计的r网格"
    )

    @field_validator("p")
    @classmethod
    def check_p(cls, v: List[float]) -> List[float]:
        if not v or any(not (1.0 <= x < 2.0) for x in v):
            raise ValueError("p必须位于[1, 2)")
        return v

    @field_validator("beta_offsets", "tail_r")
    @classmethod
    def check_positive(cls, v: List[float]) -> List[float]:
        if not v or any(not x > 0 for x in v):
            raise ValueError("偏移与r网格必须非空且全为正")
        return v


class OptimizerSpec(BaseModel):
    """常数估计的优化器规格"""
    model_config = ConfigDict(frozen=True)

    budget: int = Field(40, ge=1, description="目标函数求值次数上限")
    p: float = Field(1.5, ge=1.0, lt=2.0, description="估计所用的p")
    beta: Optional[float] = Field(None, description="估计所用的β；为空时取β_min(p)+1")
    gamma: float = Field(1.0, gt=0, description="估计所用的γ")
    parameters: List[str] = Field(
        default_factory=lambda: ["log_a", "log_b"], description="优化的参数（log_a, log_b, modulation）"
    )
    lower: List[float] = Field(default_factory=lambda: [-2.5, -0.3], description="参数下界")
    upper: List[float] = Field(default_factory=lambda: [-0.9, 0.3], description="参数上界")
    x0: Optional[List[float]] = Field(None, description="起点；为空时由种子在界内均匀抽取")

    @model_validator(mode="after")
    def check_bounds(self) -> "OptimizerSpec":
        allowed = {"log_a", "log_b", "modulation"}
        if not self.parameters or any(p not in allowed for p in self.parameters):
            raise ValueError(f"优化参数必须取自{sorted(allowed)}")
        size = len(self.parameters)
        if len(self.lower) != size or len(self.upper) != size:
            raise ValueError("上下界长度必须与参数个数一致")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("每个参数的下界必须小于上界")
        if self.x0 is not None and len(self.x0) != size:
            raise ValueError("起点长度必须与参数个数一致")
        return self


class RunConfig(BaseModel):
    """一次运行的完整配置"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    group: GroupSpec = Field(default_factory=lambda: GroupSpec(kind="heisenberg", n=1))
    cutoff: int = Field(20, ge=0, description="Hermite总阶数截断N")
    lambda_grid: LambdaGridSpec = Field(default_factory=LambdaGridSpec)
    haar: HaarBox = Field(default_factory=HaarBox)
    hermite_nodes: Optional[int] = Field(None, ge=1, description="u方向Gauss-Hermite节点数，缺省为2N+24")
    inequality: InequalityGridSpec = Field(default_factory=InequalityGridSpec)
    family: FamilySpec = Field(default_factory=FamilySpec)
    optimizer: OptimizerSpec = Field(default_factory=OptimizerSpec)
    output_dir: str = Field("results", description="输出目录")
    seed: int = Field(0, ge=0, le=UINT64_MAX, description="随机种子")

    @property
    def gh_count(self) -> int:
        return self.hermite_nodes if self.hermite_nodes is not None else 2 * self.cutoff + 24

    def quadrature(self) -> QuadratureSpec:
        return QuadratureSpec(box=self.haar, hermite_nodes=self.gh_count)

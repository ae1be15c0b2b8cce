"""
HPW不等式检验服务：不等式两侧的数值、谱尾部估计、Hausdorff-Young比值与常数估计
"""
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.optimize import minimize
from scipy.special import comb

from hpw.models.family import GaussianParams
from hpw.models.group import HaarBox
from hpw.models.inequality import (
    EstimateReport,
    HPWReport,
    InequalityConfig,
    TailBoundReport,
    TailRow,
    TrajectoryPoint,
    beta_lower_bound,
)
from hpw.models.run_config import LambdaGridSpec, OptimizerSpec
from hpw.models.spectral import CalibrationConstants, FourierField, LambdaGrid, QuadratureSpec
from hpw.services.function_family import GaussianFunction, GroupFunction
from hpw.services.group_fourier import analytic_plancherel_constant, fourier_field, lambda_grid, pfaffian_weights
from hpw.services.group_model import haar_integral, hom_norm_coords
from hpw.services.groups.base_group import BaseGroup
from hpw.services.hermite_spectral import apply_H_power, zeta_vector
from hpw.services.schatten import operator_norm, schatten_norm
from hpw.utils.logger import Logger
from hpw.utils.response import (
    DegenerateFamilyError,
    EmptyFieldError,
    NonFiniteSampleError,
    OptimizerDivergedError,
)

logger = Logger(__name__)


class FourierSupremum(BaseModel):
    """网格上的算子范数上确界及其取得点"""
    model_config = ConfigDict(frozen=True)

    value: float
    lam: Optional[List[float]] = None


# ---------------------------------------------------------------- 物理空间一侧

def weighted_lp_norm(f: GroupFunction, gamma: float, p: float, box: HaarBox) -> float:
    """
    ‖|·|^γ f‖_p 的Haar求积

    Args:
        f: 群上函数
        gamma: 权重指数（γ=0时即‖f‖_p）
        p: p ≥ 1
        box: 求积盒

    Returns:
        float: 加权范数
    """
    if not p >= 1:
        raise ValueError(f"p必须不小于1: p={p}")
    if gamma < 0:
        raise ValueError(f"权重指数必须非负: γ={gamma}")

    def integrand(v, t):
        values = np.abs(f(v, t))
        if gamma > 0:
            values = values * np.power(hom_norm_coords(v, t), gamma)
        return np.power(values, p)

    value = haar_integral(integrand, f.group, box).value.real
    return max(value, 0.0) ** (1.0 / p)


def lp_norm(f: GroupFunction, p: float, box: HaarBox) -> float:
    return weighted_lp_norm(f, 0.0, p, box)


# ---------------------------------------------------------------- Fourier一侧

def _require_nonempty(field: FourierField) -> None:
    if field.size == 0:
        raise EmptyFieldError("Fourier场为空")


def fourier_term_p1(field: FourierField, beta: float) -> FourierSupremum:
    """
    sup_λ ‖F(f)(λ)·H(η(λ))^{β/2}‖_op 的网格最大值

    不乘Plancherel常数：π_λ酉，故β=0时该值不超过‖f‖₁，与C无关

    Returns:
        FourierSupremum: 最大值与取得最大值的λ节点
    """
    _require_nonempty(field)
    best, best_lam = 0.0, None
    for sp, op in zip(field.nodes, field.ops):
        value = operator_norm(apply_H_power(op, 0.5 * beta).entries)
        if best_lam is None or value > best:
            best, best_lam = value, list(sp.lam)
    return FourierSupremum(value=best, lam=best_lam)


def fourier_term_lp(field: FourierField, beta: float, p_conj: float) -> float:
    """
    Σ_i w_i·‖F(f)(λ_i)·H(η(λ_i))^{β/2}‖_{S_{p′}}^{p′}（未开方，权重含|Pf|）

    Args:
        field: Fourier场
        beta: Hermite算子幂次β
        p_conj: 共轭指数p′ > 2
    """
    _require_nonempty(field)
    if not (p_conj > 2 and math.isfinite(p_conj)):
        raise ValueError(f"共轭指数必须满足2 < p′ < ∞: p′={p_conj}")
    weights = pfaffian_weights(field)
    total = 0.0
    for w, op in zip(weights, field.ops):
        total += w * schatten_norm(apply_H_power(op, 0.5 * beta).entries, p_conj) ** p_conj
    return float(total)


def _plancherel_c(group: BaseGroup, consts: Optional[CalibrationConstants]) -> float:
    return consts.plancherel_c if consts is not None else analytic_plancherel_constant(group)


def _grid_metadata(grid: LambdaGrid, cutoff: int, quad: QuadratureSpec) -> Dict:
    return {
        "cutoff": cutoff,
        "hermite_nodes": quad.hermite_nodes,
        "box": quad.box.model_dump(),
        "lambda_grid": dict(grid.spec),
        "lambda_nodes": grid.size,
    }


def hpw_report(f: GroupFunction, cfg: InequalityConfig, grid: LambdaGrid, cutoff: int, quad: QuadratureSpec,
               consts: Optional[CalibrationConstants] = None, field: Optional[FourierField] = None) -> HPWReport:
    """
    组装不等式 ‖f‖_p^{γ+β} ≤ C·‖|·|^γ f‖_p^β·(Fourier项)^γ 的各量

    p=1时Fourier因子为算子范数上确界（不含C）；1<p<2时为C·Σ w‖·‖_{S_{p′}}^{p′}的1/p′次方。
    Fourier因子取γ次幂，权重项取β次幂：
    ratio = weight^β·fourier^γ / ‖f‖_p^{γ+β}

    Args:
        f: 群上函数
        cfg: 不等式参数
        grid: Λ网格
        cutoff: Hermite截断
        quad: 求积规格（同时用于物理空间范数）
        consts: 校准常数，缺省用解析Plancherel常数
        field: 预先计算的Fourier场

    Returns:
        HPWReport

    Raises:
        DegenerateFamilyError: ‖f‖_p = 0
    """
    group = f.group
    if cfg.homogeneous_dimension != group.Q:
        raise ValueError(f"不等式配置的齐次维数{cfg.homogeneous_dimension}与群的Q={group.Q}不一致")
    norm_p = lp_norm(f, cfg.p, quad.box)
    if norm_p == 0.0:
        raise DegenerateFamilyError("‖f‖_p = 0，比值无定义")
    weighted = weighted_lp_norm(f, cfg.gamma, cfg.p, quad.box)
    if field is None:
        field = fourier_field(f, group, grid, cutoff, quad)

    argmax = None
    if cfg.p == 1.0:
        sup = fourier_term_p1(field, cfg.beta)
        fourier_value, fourier_root, argmax = sup.value, sup.value, sup.lam
    else:
        p_conj = cfg.p_conj
        fourier_value = _plancherel_c(group, consts) * fourier_term_lp(field, cfg.beta, p_conj)
        fourier_root = fourier_value ** (1.0 / p_conj)

    lhs = norm_p ** (cfg.gamma + cfg.beta)
    weight_term = weighted ** cfg.beta
    fourier_term = fourier_root ** cfg.gamma
    ratio = weight_term * fourier_term / lhs
    if not math.isfinite(ratio):
        raise NonFiniteSampleError("HPW比值非有限")
    metadata = _grid_metadata(grid, cutoff, quad)
    metadata["plancherel_c"] = _plancherel_c(group, consts)
    return HPWReport(
        p=cfg.p,
        beta=cfg.beta,
        gamma=cfg.gamma,
        norm_p=norm_p,
        weighted_norm=weighted,
        fourier_value=fourier_value,
        lhs=lhs,
        weight_term=weight_term,
        fourier_term=fourier_term,
        ratio=ratio,
        argmax_lambda=argmax,
        metadata=metadata,
    )


def p1_refinement_sensitivity(f: GroupFunction, beta: float, grid_spec: LambdaGridSpec, cutoff: int,
                              quad: QuadratureSpec, factors: Sequence[int] = (1, 2)) -> Dict[str, object]:
    """p=1的Fourier项在相邻网格加密层级上的取值与最大相对变化"""
    values = []
    for factor in factors:
        spec = grid_spec if factor == 1 else grid_spec.refined(factor)
        field = fourier_field(f, f.group, lambda_grid(f.group, spec), cutoff, quad)
        values.append(fourier_term_p1(field, beta).value)
    ref = values[-1]
    change = max(abs(v - ref) for v in values) / ref if ref > 0 else 0.0
    return {"factors": list(factors), "values": values, "relative_change": change}


# ---------------------------------------------------------------- 谱尾部

def _column_masses(field: FourierField) -> List[Tuple[np.ndarray, np.ndarray]]:
    out = []
    for sp, op in zip(field.nodes, field.ops):
        out.append((zeta_vector(sp, op.cutoff), np.sum(np.abs(op.entries) ** 2, axis=0)))
    return out


def spectral_tail_mass(field: FourierField, r: float, side: str = "below",
                       consts: Optional[CalibrationConstants] = None) -> float:
    """
    Σ_i w_i·Σ_{α: ζ(α,λ_i) ≤ r} ‖F(f)(λ_i)Φ_α‖²（side="above"时取ζ > r）

    consts给定时乘以Plancherel常数C，使below(∞)等于plancherel_sum
    """
    if not r > 0:
        raise ValueError(f"r必须为正: r={r}")
    if side not in ("below", "above"):
        raise ValueError(f"side必须为below或above: {side}")
    if field.size == 0:
        return 0.0
    weights = pfaffian_weights(field)
    total = 0.0
    for w, (z, mass) in zip(weights, _column_masses(field)):
        mask = z <= r if side == "below" else z > r
        total += w * float(np.sum(mass[mask]))
    return total * (consts.plancherel_c if consts is not None else 1.0)


def annular_spectral_mass(field: FourierField, r_low: float, r_high: float,
                          consts: Optional[CalibrationConstants] = None) -> float:
    """r_low < ζ(α,λ) ≤ r_high 的谱质量"""
    if not 0 < r_low < r_high:
        raise ValueError("需要0 < r_low < r_high")
    if field.size == 0:
        return 0.0
    weights = pfaffian_weights(field)
    total = 0.0
    for w, (z, mass) in zip(weights, _column_masses(field)):
        total += w * float(np.sum(mass[(z > r_low) & (z <= r_high)]))
    return total * (consts.plancherel_c if consts is not None else 1.0)


def _safe_ratio(mass: float, bound: float) -> float:
    if mass == 0.0:
        return 0.0
    return mass / bound if bound > 0 else math.inf


def tail_bound_check(f: GroupFunction, cfg: InequalityConfig, r_grid: Sequence[float], grid: LambdaGrid,
                     cutoff: int, quad: QuadratureSpec, consts: Optional[CalibrationConstants] = None,
                     field: Optional[FourierField] = None) -> TailBoundReport:
    """
    谱尾部质量与无常数上界的比值表

    ζ ≤ r 一侧的上界为 r^{(n+k)(1−2/p′)}·‖f‖_p²；
    ζ > r 一侧的上界为 (r^{n+k−βp/(2−p)})^{1−2/p′}·A(f,β)^{2/p′}，A为fourier_term_lp（未开方）。
    p = 1时p′ = ∞，A^{2/p′}取为算子范数上确界的平方

    Returns:
        TailBoundReport: 每个r一行，拟合常数为各侧比值的最大值
    """
    group = f.group
    if field is None:
        field = fourier_field(f, group, grid, cutoff, quad)
    dim = group.n + group.k
    c = _plancherel_c(group, consts)
    unit = CalibrationConstants(plancherel_c=c, inversion_kappa=1.0)
    norm_p = lp_norm(f, cfg.p, quad.box)
    if cfg.p == 1.0:
        shrink = 1.0
        a_power = fourier_term_p1(field, cfg.beta).value ** 2
    else:
        shrink = 1.0 - 2.0 / cfg.p_conj
        a_power = (c * fourier_term_lp(field, cfg.beta, cfg.p_conj)) ** (2.0 / cfg.p_conj)
    above_exponent = (dim - cfg.beta * cfg.p / (2.0 - cfg.p)) * shrink

    rows = []
    for r in sorted(float(x) for x in r_grid):
        below = spectral_tail_mass(field, r, "below", unit)
        above = spectral_tail_mass(field, r, "above", unit)
        bound_below = r ** (dim * shrink) * norm_p ** 2
        bound_above = r ** above_exponent * a_power
        rows.append(TailRow(
            r=r,
            mass_below=below,
            mass_above=above,
            bound_below=bound_below,
            bound_above=bound_above,
            ratio_below=_safe_ratio(below, bound_below),
            ratio_above=_safe_ratio(above, bound_above),
        ))
    total = spectral_tail_mass(field, math.inf, "below", unit) if field.size else 0.0
    metadata = _grid_metadata(grid, cutoff, quad)
    metadata["gamma"] = cfg.gamma
    return TailBoundReport(
        p=cfg.p,
        beta=cfg.beta,
        rows=rows,
        total_mass=total,
        fitted_below=max((row.ratio_below for row in rows), default=0.0),
        fitted_above=max((row.ratio_above for row in rows), default=0.0),
        metadata=metadata,
    )


# ---------------------------------------------------------------- Hausdorff-Young

def hausdorff_young_ratio(f: GroupFunction, p: float, grid: LambdaGrid, cutoff: int, quad: QuadratureSpec,
                          consts: Optional[CalibrationConstants] = None,
                          field: Optional[FourierField] = None) -> float:
    """
    (C·Σ w‖F(f)(λ)‖_{S_{p′}}^{p′})^{1/p′} / ‖f‖_p

    Args:
        f: 群上函数
        p: 1 < p < 2
    """
    if not 1.0 < p < 2.0:
        raise ValueError(f"Hausdorff-Young比值要求1 < p < 2: p={p}")
    norm_p = lp_norm(f, p, quad.box)
    if norm_p == 0.0:
        raise DegenerateFamilyError("‖f‖_p = 0，比值无定义")
    if field is None:
        field = fourier_field(f, f.group, grid, cutoff, quad)
    p_conj = p / (p - 1.0)
    value = _plancherel_c(f.group, consts) * fourier_term_lp(field, 0.0, p_conj)
    return value ** (1.0 / p_conj) / norm_p


# ---------------------------------------------------------------- 频率计数

def frequency_count(eta, r: float) -> float:
    """#{α ∈ ℕ^n : Σ_j (2α_j+1)η_j ≤ r}"""
    eta = np.asarray(eta, dtype=float)
    n = eta.shape[0]
    if np.allclose(eta, eta[0], rtol=1e-13, atol=0.0):
        m = math.floor((r / eta[0] - n) / 2.0 + 1e-12)
        return float(comb(m + n, n)) if m >= 0 else 0.0

    def count(j: int, budget: float) -> float:
        if j == n:
            return 1.0
        top = math.floor((budget / eta[j] - 1.0) / 2.0 + 1e-12)
        return sum(count(j + 1, budget - (2 * a + 1) * eta[j]) for a in range(top + 1)) if top >= 0 else 0.0

    return count(0, r)


def frequency_count_measure(group: BaseGroup, grid: LambdaGrid, r: float) -> float:
    """{(α, λ): ζ(α,λ) ≤ r} 在 计数×|Pf(λ)|dλ 下的离散测度"""
    total = 0.0
    for lam, w in zip(grid.lambdas, grid.weights):
        eta = group.eta(lam)
        total += w * float(np.prod(eta)) * frequency_count(eta, r)
    return total


def count_grid_spec(group: BaseGroup, r_values: Sequence[float]) -> LambdaGridSpec:
    """频率计数专用的细网格：覆盖到 max(r)/Σ_jη_j(λ̂)"""
    unit = np.zeros(group.k)
    unit[0] = 1.0
    scale = float(np.sum(group.eta(unit)))
    lambda_max = 1.01 * max(r_values) / scale
    lambda_min = min(r_values) / (50.0 * scale)
    decades = max(1, math.ceil(math.log10(lambda_max / lambda_min)))
    origin = 64
    return LambdaGridSpec(
        lambda_min=lambda_min,
        lambda_max=lambda_max,
        nodes=2 * (origin + 160 * decades),
        origin_panel_nodes=origin,
        angular_nodes=1,
    )


def frequency_count_exponent(group: BaseGroup, r_values: Sequence[float],
                             grid: Optional[LambdaGrid] = None) -> Dict[str, object]:
    """
    频率计数测度关于r的对数-对数回归斜率（理论值n+k）

    Returns:
        dict: slope, intercept, r, measure
    """
    r_values = sorted(float(r) for r in r_values)
    if len(r_values) < 2 or r_values[0] <= 0:
        raise ValueError("至少需要两个正的r值")
    if grid is None:
        grid = lambda_grid(group, count_grid_spec(group, r_values))
    measures = [frequency_count_measure(group, grid, r) for r in r_values]
    if any(m <= 0 for m in measures):
        raise DegenerateFamilyError("频率计数测度为零，网格未覆盖所需的λ范围")
    slope, intercept = np.polyfit(np.log(r_values), np.log(measures), 1)
    return {"slope": float(slope), "intercept": float(intercept), "r": r_values, "measure": measures}


# ---------------------------------------------------------------- 常数估计

def admissible_betas(p: float, homogeneous_dimension: int, offsets: Sequence[float]) -> List[float]:
    """β = Q(1/p − 1/2) + 偏移"""
    base = beta_lower_bound(p, homogeneous_dimension)
    return [base + float(o) for o in offsets]


class _BudgetExhausted(Exception):
    pass


def _params_from_vector(base: GaussianParams, names: Sequence[str], x: np.ndarray, k: int) -> GaussianParams:
    update = {}
    for name, value in zip(names, x):
        if name == "log_a":
            update["a"] = float(math.exp(value))
        elif name == "log_b":
            update["b"] = float(math.exp(value))
        elif name == "modulation":
            update["modulation"] = [float(value)] * k
    return base.model_copy(update=update)


def _start_point(spec: OptimizerSpec, seed: int) -> np.ndarray:
    if spec.x0 is not None:
        return np.clip(np.array(spec.x0, dtype=float), spec.lower, spec.upper)
    rng = np.random.default_rng(seed)
    return rng.uniform(np.array(spec.lower), np.array(spec.upper))


def estimate_constant(group: BaseGroup, cfg: InequalityConfig, spec: OptimizerSpec, grid: LambdaGrid,
                      cutoff: int, quad: QuadratureSpec, consts: Optional[CalibrationConstants] = None,
                      seed: int = 0, base: Optional[GaussianParams] = None) -> EstimateReport:
    """
    在参数化高斯族上用Nelder-Mead最小化HPW比值

    每个成员先伸缩到中心衰减率为1的代表元再求值（比值对伸缩与数乘不变），
    因此整个族共用同一组Λ网格与求积盒

    Args:
        group: 群描述
        cfg: 不等式参数
        spec: 优化器规格（参数名、上下界、起点、预算）
        grid: Λ网格
        cutoff: Hermite截断
        quad: 求积规格
        consts: 校准常数
        seed: 起点缺省时的随机种子
        base: 未被优化的参数取值

    Returns:
        EstimateReport: 最小比值、取得点与完整轨迹

    Raises:
        OptimizerDivergedError: 某次求值非有限
    """
    base = base or GaussianParams()
    trajectory: List[TrajectoryPoint] = []
    budget = spec.budget

    def evaluate(x: np.ndarray) -> float:
        if len(trajectory) >= budget:
            raise _BudgetExhausted()
        params = _params_from_vector(base, spec.parameters, x, group.k)
        normalized, _ = GaussianFunction(group, params).normalized()
        try:
            ratio = hpw_report(normalized, cfg, grid, cutoff, quad, consts).ratio
        except NonFiniteSampleError:
            ratio = math.nan
        point = TrajectoryPoint(
            evaluation=len(trajectory),
            parameters={name: float(v) for name, v in zip(spec.parameters, x)},
            normalized_a=normalized.params.a,
            ratio=ratio,
        )
        trajectory.append(point)
        logger.debug("优化求值", point.model_dump())
        if not math.isfinite(ratio):
            raise OptimizerDivergedError(
                f"第{point.evaluation}次求值得到非有限比值",
                errors=[{"field": "trajectory", "message": str([t.model_dump() for t in trajectory])}],
            )
        return ratio

    x0 = _start_point(spec, seed)
    message = "budget_exhausted"
    if budget == 1:
        evaluate(x0)
    else:
        try:
            result = minimize(
                evaluate,
                x0,
                method="Nelder-Mead",
                bounds=list(zip(spec.lower, spec.upper)),
                options={"maxfev": budget, "xatol": 1e-4, "fatol": 1e-10},
            )
            message = str(result.message)
        except _BudgetExhausted:
            pass

    best = min(trajectory, key=lambda t: (t.ratio, t.evaluation))
    logger.info("常数估计完成", {"min_ratio": best.ratio, "evaluations": len(trajectory)})
    return EstimateReport(
        min_ratio=best.ratio,
        argmin=best.parameters,
        trajectory=trajectory,
        evaluations=len(trajectory),
        budget=budget,
        p=cfg.p,
        beta=cfg.beta,
        gamma=cfg.gamma,
        message=message,
        metadata={**_grid_metadata(grid, cutoff, quad), "seed": seed, "x0": x0.tolist()},
    )

"""
群Fourier变换服务：表示矩阵元、F(f)(λ)的截断矩阵、Plancherel配对、反演与伸缩协变性
"""
import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from hpw.config.settings import get_settings
from hpw.models.group import GroupPoint
from hpw.models.run_config import LambdaGridSpec
from hpw.models.spectral import (
    CalibrationConstants,
    FourierField,
    LambdaGrid,
    QuadratureMeta,
    QuadratureSpec,
    SpectralOperator,
    SpectralParameter,
    basis_dimension,
)
from hpw.services.function_family import AdjointFunction, DilatedFunction, GroupFunction
from hpw.services.group_model import gauss_legendre, haar_integral
from hpw.services.groups.base_group import BaseGroup
from hpw.services.hermite_spectral import (
    cached_gauss_hermite,
    hermite_table,
    multi_index_array,
    spectral_parameter,
)
from hpw.utils.logger import Logger
from hpw.utils.response import (
    CalibrationError,
    DegenerateFamilyError,
    DimensionMismatchError,
    EmptyFieldError,
    NonFiniteSampleError,
    NotSupportedError,
)

logger = Logger(__name__)

# gft单块采样点上限
SAMPLE_BUDGET = 2_000_000


def analytic_plancherel_constant(group: BaseGroup) -> float:
    """当前归一化下Plancherel常数与反演常数的解析值 (2π)^{-(n+k)}"""
    return (2.0 * math.pi) ** (-(group.n + group.k))


# ---------------------------------------------------------------- Λ网格

def _radial_nodes(lambda_min: float, lambda_max: float, count: int,
                  origin_nodes: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    # 单侧：(0, λ_min]上的GL面板 + [λ_min, λ_max]上按十进位划分的对数GL面板
    edges = [lambda_min]
    while edges[-1] * 10.0 < lambda_max * (1.0 - 1e-12):
        edges.append(edges[-1] * 10.0)
    edges.append(lambda_max)
    panels = len(edges) - 1
    remaining = count - origin_nodes
    if remaining < panels:
        raise ValueError(f"节点数不足：{panels}个十进位面板至少需要{panels}个节点")
    nodes, weights, ids = [], [], []
    if origin_nodes > 0:
        x, w = gauss_legendre(origin_nodes, 0.5 * lambda_min)
        nodes.append(x + 0.5 * lambda_min)
        weights.append(w)
        ids.append(np.zeros(origin_nodes, dtype=np.int64))
    base, extra = divmod(remaining, panels)
    for i in range(panels):
        m = base + (1 if i < extra else 0)
        lo, hi = math.log(edges[i]), math.log(edges[i + 1])
        s, w = gauss_legendre(m, 0.5 * (hi - lo))
        lam = np.exp(s + 0.5 * (hi + lo))
        nodes.append(lam)
        weights.append(w * lam)
        ids.append(np.full(m, i + 1, dtype=np.int64))
    return np.concatenate(nodes), np.concatenate(weights), np.concatenate(ids)


def lambda_grid(group: BaseGroup, spec: LambdaGridSpec) -> LambdaGrid:
    """
    构造Λ = ℝ^k \\ {0}上的求积网格

    k=1为关于原点对称的几何网格；k=2、3为径向面板与角向规则的乘积

    Args:
        group: 群描述
        spec: 网格规格

    Returns:
        LambdaGrid: 节点、测度权重dλ与面板编号（0为内层面板，最大编号为最外层面板）
    """
    radial, rw, ids = _radial_nodes(spec.lambda_min, spec.lambda_max, spec.nodes // 2, spec.origin_panel_nodes)
    info = spec.model_dump()
    info["k"] = group.k
    if group.k == 1:
        lambdas = np.concatenate([-radial[::-1], radial])[:, None]
        weights = np.concatenate([rw[::-1], rw])
        panels = np.concatenate([ids[::-1], ids])
        return LambdaGrid(lambdas, weights, panels, info)
    a = spec.angular_nodes
    if group.k == 2:
        theta = 2.0 * math.pi * (np.arange(a) + 0.5) / a
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        dir_w = np.full(a, 2.0 * math.pi / a)
    elif group.k == 3:
        cos_t, w_c = gauss_legendre(a, 1.0)
        phi = 2.0 * math.pi * (np.arange(2 * a) + 0.5) / (2 * a)
        sin_t = np.sqrt(1.0 - cos_t ** 2)
        dirs = np.stack([
            np.outer(sin_t, np.cos(phi)).ravel(),
            np.outer(sin_t, np.sin(phi)).ravel(),
            np.repeat(cos_t, 2 * a),
        ], axis=-1)
        dir_w = np.outer(w_c, np.full(2 * a, math.pi / a)).ravel()
    else:
        raise NotSupportedError(f"暂不支持中心维数k={group.k}的Λ网格")
    lambdas = (radial[:, None, None] * dirs[None, :, :]).reshape(-1, group.k)
    weights = (rw[:, None] * radial[:, None] ** (group.k - 1) * dir_w[None, :]).ravel()
    panels = np.repeat(ids, dirs.shape[0])
    return LambdaGrid(lambdas, weights, panels, info)


# ---------------------------------------------------------------- 表示矩阵

def _default_rep_nodes(cutoff: int) -> int:
    return max(64, 2 * cutoff + 40)


@lru_cache(maxsize=4096)
def _rep_table_cached(max_order: int, a: float, c: float, count: int) -> np.ndarray:
    s, w = cached_gauss_hermite(count)
    left = hermite_table(max_order, s + c)     # φ_α(s + c)
    right = hermite_table(max_order, s - c)    # φ_γ(s − c)
    weighted = (w * np.exp(1j * a * s))[None, :] * left
    table = right @ weighted.T                 # [γ, α]
    table.setflags(write=False)
    return table


def rep_table_1d(max_order: int, a: float, c: float, count: int) -> np.ndarray:
    """
    一维矩阵元 T[γ, α] = ∫ e^{ias} φ_α(s+c) φ_γ(s−c) ds（Gauss-Hermite求积，带记忆化）

    Args:
        max_order: 最高阶
        a: √η·p
        c: √η·q/2
        count: Gauss-Hermite节点数
    """
    # 量化键，使同一网格上的重复调用命中缓存
    return _rep_table_cached(max_order, round(float(a), 14), round(float(c), 14), count)


def _lambda_coords(v: np.ndarray, sp: SpectralParameter) -> Tuple[np.ndarray, np.ndarray]:
    coords = np.asarray(v, dtype=float) @ sp.basis
    return coords[..., : sp.n], coords[..., sp.n:]


def rep_matrix(x: GroupPoint, sp: SpectralParameter, cutoff: int,
               hermite_nodes: Optional[int] = None) -> np.ndarray:
    """
    π_λ(x)的截断矩阵 R[γ, α] = ⟨π_λ(x)Φ_α, Φ_γ⟩

    坐标方向可分离：R = e^{iλ·t}·Π_j T_j[γ_j, α_j]

    Returns:
        形状(D, D)的复矩阵，D = binom(N+n, n)
    """
    if x.n != sp.n or x.k != sp.k:
        raise DimensionMismatchError("群元素与谱参数维数不一致")
    count = hermite_nodes or _default_rep_nodes(cutoff)
    p, q = _lambda_coords(x.v, sp)
    root = np.sqrt(sp.eta_array)
    alphas = multi_index_array(sp.n, cutoff)
    matrix = np.full((alphas.shape[0], alphas.shape[0]), np.exp(1j * float(x.t_array @ sp.lam_array)))
    for j in range(sp.n):
        table = rep_table_1d(cutoff, root[j] * p[j], 0.5 * root[j] * q[j], count)
        matrix = matrix * table[np.ix_(alphas[:, j], alphas[:, j])]
    return matrix


def _cutoff_from_length(n: int, length: int) -> int:
    cutoff = 0
    while basis_dimension(n, cutoff) < length:
        cutoff += 1
    if basis_dimension(n, cutoff) != length:
        raise DimensionMismatchError(f"系数长度{length}不是n={n}时的合法截断维数")
    return cutoff


def rep_apply(x: GroupPoint, sp: SpectralParameter, coeffs, hermite_nodes: Optional[int] = None) -> np.ndarray:
    """
    将π_λ(x)的截断矩阵作用于Hermite系数

    Args:
        x: 群元素
        sp: 谱参数
        coeffs: 长度为binom(N+n, n)的复系数

    Returns:
        像的系数（截断）
    """
    coeffs = np.asarray(coeffs, dtype=complex).ravel()
    cutoff = _cutoff_from_length(sp.n, coeffs.shape[0])
    return rep_matrix(x, sp, cutoff, hermite_nodes) @ coeffs


def rep_leakage_residual(x: GroupPoint, sp: SpectralParameter, cutoff: int, margin: int = 8) -> Dict[str, float]:
    """
    截断N下π_λ(x)低阶列(|α| ≤ N−margin)的范数亏损，与N+margin参照截断对账

    亏损 1 − ‖P_N π_λ(x)Φ_α‖² 应等于参照矩阵在 N < |γ| ≤ N+margin 行上的质量加上参照自身的亏损

    Returns:
        {"leakage": 截断N下的最大亏损, "residual": 对账残差最大值}
    """
    rep = rep_matrix(x, sp, cutoff)
    oracle = rep_matrix(x, sp, cutoff + margin)
    low = np.flatnonzero(multi_index_array(sp.n, cutoff).sum(axis=1) <= cutoff - margin)
    if not low.size:
        return {"leakage": 0.0, "residual": 0.0}
    dim = rep.shape[0]
    deficit = 1.0 - np.sum(np.abs(rep[:, low]) ** 2, axis=0)
    band = np.sum(np.abs(oracle[dim:, low]) ** 2, axis=0)
    oracle_deficit = 1.0 - np.sum(np.abs(oracle[:, low]) ** 2, axis=0)
    return {
        "leakage": float(np.max(deficit)),
        "residual": float(np.max(np.abs(deficit - band - oracle_deficit))),
    }


# ---------------------------------------------------------------- 部分中心Fourier变换

def _tensor_nodes(nodes: np.ndarray, weights: np.ndarray, dims: int) -> Tuple[np.ndarray, np.ndarray]:
    grids = np.meshgrid(*([nodes] * dims), indexing="ij")
    wgrids = np.meshgrid(*([weights] * dims), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    w = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    return pts, w


def partial_central_fourier(f: GroupFunction, mu, pq, quad: Optional[QuadratureSpec] = None) -> complex:
    """
    f^μ(p, q) = ∫ f(p, q, t) e^{iμ·t} dt

    Args:
        f: 群上函数
        mu: 实k维向量
        pq: 第一层点（GroupPoint或长度2n的向量，GroupPoint的t分量被忽略）
        quad: 求积规格（使用其中心坐标截断与节点数）

    Returns:
        complex: 求积值
    """
    quad = quad or QuadratureSpec()
    group = f.group
    v = pq.v if isinstance(pq, GroupPoint) else np.asarray(pq, dtype=float).ravel()
    mu = np.asarray(mu, dtype=float).ravel()
    if v.shape[0] != 2 * group.n or mu.shape[0] != group.k:
        raise DimensionMismatchError("点或频率的维数与群不一致")
    t_nodes, t_w = gauss_legendre(quad.box.nodes_t, quad.box.radius_t)
    t_pts, t_weights = _tensor_nodes(t_nodes, t_w, group.k)
    values = np.asarray(f(v[None, :], t_pts))
    if not np.all(np.isfinite(values)):
        raise NonFiniteSampleError("部分中心Fourier变换中出现非有限采样值")
    return complex(np.sum(t_weights * np.exp(1j * (t_pts @ mu)) * values))


# ---------------------------------------------------------------- 群Fourier变换

def _axis_tables(cutoff: int, s: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    # 形状(cutoff+1, C, K)：φ_m(s_i + shift_c)
    return hermite_table(cutoff, s[None, :] + shifts[:, None])


def _tensor_table(tables: Sequence[np.ndarray], alphas: np.ndarray, s_idx: np.ndarray) -> np.ndarray:
    # 输出形状(C, K^n, D)：Π_j φ_{α_j}(s_j + shift)
    out = None
    for j, table in enumerate(tables):
        part = table[alphas[:, j]][:, :, s_idx[:, j]]    # (D, C, S)
        out = part if out is None else out * part
    return np.transpose(out, (1, 2, 0))


def gft(f: GroupFunction, sp: SpectralParameter, cutoff: int, quad: QuadratureSpec) -> SpectralOperator:
    """
    群Fourier变换F(f)(λ)在{Φ_α^{η(λ)}}基下的截断矩阵

    先对t做部分中心Fourier变换，再对p积分得到 ĝ(s, q) = ∫ f^λ(p,q) e^{i√η s·p} dp，
    最后对(q, s)求积 Σ ĝ(s,q)·Π_j φ_{α_j}(s_j + c_j)·φ_{γ_j}(s_j − c_j)，c = √η·q/2

    Args:
        f: 群上函数
        sp: 谱参数
        cutoff: 总阶数截断N
        quad: 求积规格

    Returns:
        SpectralOperator: 附带求积元数据
    """
    if cutoff < 0:
        raise ValueError("截断阶必须非负")
    group = f.group
    if group.n != sp.n or group.k != sp.k:
        raise DimensionMismatchError("函数所在群与谱参数维数不一致")
    n, k = sp.n, sp.k
    box = quad.box

    v_nodes, v_w = gauss_legendre(box.nodes_v, box.radius_v)
    t_nodes, t_w = gauss_legendre(box.nodes_t, box.radius_t)
    p_pts, p_w = _tensor_nodes(v_nodes, v_w, n)
    q_pts, q_w = _tensor_nodes(v_nodes, v_w, n)
    t_pts, t_weights = _tensor_nodes(t_nodes, t_w, k)
    phase_t = t_weights * np.exp(1j * (t_pts @ sp.lam_array))

    s_1d, sw_1d = cached_gauss_hermite(quad.hermite_nodes, get_settings().HPW_NODE_CACHE_DIR)
    s_pts, s_w = _tensor_nodes(s_1d, sw_1d, n)
    s_idx = np.stack(np.meshgrid(*([np.arange(s_1d.shape[0])] * n), indexing="ij"), axis=-1).reshape(-1, n)

    root = np.sqrt(sp.eta_array)
    kernel = np.exp(1j * ((s_pts * root) @ p_pts.T)) * p_w[None, :]    # (K^n, m^n)
    p_dir = sp.basis[:, :n]
    q_dir = sp.basis[:, n:]
    p_vecs = p_pts @ p_dir.T                                            # (m^n, 2n)

    alphas = multi_index_array(n, cutoff)
    dim = alphas.shape[0]
    entries = np.zeros((dim, dim), dtype=complex)
    hs_exact = 0.0
    per_q = p_pts.shape[0] * t_pts.shape[0]
    chunk = max(1, SAMPLE_BUDGET // per_q)

    for start in range(0, q_pts.shape[0], chunk):
        q_chunk = q_pts[start:start + chunk]
        wq = q_w[start:start + chunk]
        v = p_vecs[:, None, :] + (q_chunk @ q_dir.T)[None, :, :]       # (m^n, C, 2n)
        values = np.asarray(f(v[:, :, None, :], t_pts[None, None, :, :]))
        if not np.all(np.isfinite(values)):
            raise NonFiniteSampleError("群Fourier变换中出现非有限采样值")
        f_lam = values @ phase_t                                        # (m^n, C)
        hs_exact += float(np.sum(wq * (p_w @ np.abs(f_lam) ** 2)))
        g_hat = kernel @ f_lam                                          # (K^n, C)

        shifts = 0.5 * q_chunk * root[None, :]                          # (C, n)
        plus = [_axis_tables(cutoff, s_1d, shifts[:, j]) for j in range(n)]
        minus = [_axis_tables(cutoff, s_1d, -shifts[:, j]) for j in range(n)]
        a_tab = _tensor_table(plus, alphas, s_idx)                      # (C, S, D)
        b_tab = _tensor_table(minus, alphas, s_idx)
        weight = (g_hat.T * s_w[None, :]) * wq[:, None]                 # (C, S)
        size = a_tab.shape[0] * a_tab.shape[1]
        entries += b_tab.reshape(size, dim).T @ (weight.reshape(size, 1) * a_tab.reshape(size, dim))

    hs_exact *= (2.0 * math.pi) ** n / sp.pfaffian
    captured = float(np.sum(np.abs(entries) ** 2))
    meta = QuadratureMeta(
        cutoff=cutoff,
        box=box,
        hermite_nodes=quad.hermite_nodes,
        node_count=int(p_pts.shape[0] * q_pts.shape[0] * t_pts.shape[0]),
        hs_capture=(captured / hs_exact) if hs_exact > 0 else None,
    )
    return SpectralOperator(sp=sp, cutoff=cutoff, entries=entries, meta=meta)


def _thread_count(threads: Optional[int]) -> int:
    return threads if threads and threads > 0 else get_settings().thread_count


def fourier_field(f: GroupFunction, group: BaseGroup, grid: LambdaGrid, cutoff: int, quad: QuadratureSpec,
                  pfaffian_weighted: bool = True, threads: Optional[int] = None) -> FourierField:
    """
    在Λ网格的每个节点上计算gft

    Args:
        f: 群上函数
        group: 群描述（须与f所在群一致）
        grid: Λ网格
        cutoff: 总阶数截断
        quad: 求积规格
        pfaffian_weighted: 权重是否乘以|Pf(λ)|
        threads: 线程数，缺省取HPW_THREADS

    Returns:
        FourierField: 节点顺序与网格一致
    """
    if group.descriptor_hash() != f.group.descriptor_hash():
        raise DimensionMismatchError("函数所在群与给定群描述不一致")
    if grid.k != group.k:
        raise DimensionMismatchError("Λ网格维数与群不一致")
    params = [spectral_parameter(group, lam) for lam in grid.lambdas]

    def compute(sp: SpectralParameter) -> SpectralOperator:
        return gft(f, sp, cutoff, quad)

    workers = min(_thread_count(threads), max(1, len(params)))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            ops = list(pool.map(compute, params))
    else:
        ops = [compute(sp) for sp in params]
    weights = np.array(grid.weights, dtype=float)
    if pfaffian_weighted:
        weights = weights * np.array([sp.pfaffian for sp in params])
    logger.debug("Fourier场计算完成", {"nodes": len(params), "cutoff": cutoff, "threads": workers})
    return FourierField(
        nodes=params,
        weights=weights,
        ops=ops,
        pfaffian_weighted=pfaffian_weighted,
        descriptor_hash=group.descriptor_hash(),
        grid_spec=dict(grid.spec),
    )


def _require_nonempty(field: FourierField) -> None:
    if field.size == 0:
        raise EmptyFieldError("Fourier场为空")


def pfaffian_weights(field: FourierField) -> np.ndarray:
    """含|Pf(λ)|的测度权重"""
    if field.pfaffian_weighted:
        return field.weights
    return field.weights * np.array([sp.pfaffian for sp in field.nodes])


def plancherel_sum(field: FourierField, consts: CalibrationConstants) -> float:
    """C·Σ_i w_i·‖M_i‖²_{S₂}"""
    _require_nonempty(field)
    weights = pfaffian_weights(field)
    total = sum(w * float(np.sum(np.abs(op.entries) ** 2)) for w, op in zip(weights, field.ops))
    return consts.plancherel_c * total


def trace_sum(field: FourierField) -> complex:
    """Σ_i w_i·tr(M_i)，即κ = 1时在单位元处的反演值"""
    _require_nonempty(field)
    weights = pfaffian_weights(field)
    return complex(sum(w * np.trace(op.entries) for w, op in zip(weights, field.ops)))


def invert(field: FourierField, x: GroupPoint, consts: CalibrationConstants,
           hermite_nodes: Optional[int] = None) -> complex:
    """
    反演公式 f(x) ≈ κ·Σ_i w_i·tr(π_{λ_i}(x)* M_i)

    Args:
        field: |Pf|加权的Fourier场
        x: 求值点
        consts: 校准常数

    Returns:
        complex: f(x)的近似
    """
    _require_nonempty(field)
    weights = pfaffian_weights(field)
    total = 0.0 + 0.0j
    for w, op in zip(weights, field.ops):
        rep = rep_matrix(x, op.sp, op.cutoff, hermite_nodes)
        total += w * complex(np.sum(np.conj(rep) * op.entries))
    return consts.inversion_kappa * total


def outer_panel_share(field: FourierField, grid: LambdaGrid) -> Dict[str, float]:
    """最外层与内层面板在Plancherel质量中的占比（Λ截断误差指标）"""
    _require_nonempty(field)
    if grid.size != field.size:
        raise DimensionMismatchError("网格与Fourier场节点数不一致")
    weights = pfaffian_weights(field)
    mass = np.array([w * float(np.sum(np.abs(op.entries) ** 2)) for w, op in zip(weights, field.ops)])
    total = float(mass.sum())
    if total == 0.0:
        return {"outer": 0.0, "inner": 0.0}
    outer_id = int(grid.panels.max())
    return {
        "outer": float(mass[grid.panels == outer_id].sum() / total),
        "inner": float(mass[grid.panels == 0].sum() / total),
    }


# ---------------------------------------------------------------- 校准

def calibrate_from_fields(functions: Sequence[GroupFunction], fields: Sequence[FourierField],
                          quad: QuadratureSpec, max_residual: Optional[float] = None) -> CalibrationConstants:
    """
    用已计算的Fourier场按最小二乘拟合C与κ

    C最小化 Σ(1 − C·S_f/‖f‖²)²，κ最小化 Σ|1 − κ·I_f/f(e)|²

    Returns:
        CalibrationConstants

    Raises:
        DegenerateFamilyError: 函数少于3个或全为零
        CalibrationError: 最大相对残差超过阈值
    """
    if len(functions) < 3 or len(functions) != len(fields):
        raise DegenerateFamilyError("校准至少需要3个函数且每个函数对应一个Fourier场")
    threshold = max_residual if max_residual is not None else get_settings().CALIBRATION_MAX_RESIDUAL
    group = functions[0].group
    ratios_c, ratios_k, details = [], [], []
    for f, field in zip(functions, fields):
        norm2 = haar_integral(lambda v, t, f=f: np.abs(f(v, t)) ** 2, group, quad.box).value.real
        mass = plancherel_sum(field, CalibrationConstants(plancherel_c=1.0, inversion_kappa=1.0))
        value_e = f.value_at(GroupPoint.identity(group.n, group.k))
        trace_e = trace_sum(field)
        detail = {"norm_squared": norm2, "spectral_mass": mass, "value_at_e": abs(value_e)}
        if norm2 > 0 and mass > 0:
            ratios_c.append(mass / norm2)
        if abs(value_e) > 1e-12 * max(1.0, math.sqrt(max(norm2, 0.0))):
            ratios_k.append(trace_e / value_e)
        details.append(detail)
    if not ratios_c or not ratios_k:
        raise DegenerateFamilyError("校准函数族退化（全为零或在单位元处为零）")

    rc = np.array(ratios_c)
    c = float(np.sum(rc) / np.sum(rc * rc))
    rk = np.array(ratios_k, dtype=complex)
    kappa = float(np.sum(rk.real) / np.sum(np.abs(rk) ** 2))
    residual_c = float(np.max(np.abs(c * rc - 1.0)))
    residual_k = float(np.max(np.abs(kappa * rk - 1.0)))
    for detail, f, field in zip(details, functions, fields):
        detail["plancherel_relative_error"] = abs(c * detail["spectral_mass"] / detail["norm_squared"] - 1.0) \
            if detail["norm_squared"] > 0 else 0.0

    if kappa <= 0 or c <= 0:
        raise CalibrationError("拟合得到的常数非正", errors=[{"message": f"C={c}, κ={kappa}"}])
    consts = CalibrationConstants(
        plancherel_c=c,
        inversion_kappa=kappa,
        residual_c=residual_c,
        residual_kappa=residual_k,
        analytic_reference=analytic_plancherel_constant(group),
        family_size=len(functions),
        per_function=details,
    )
    logger.info("校准完成", {"C": c, "kappa": kappa, "residual_c": residual_c, "residual_kappa": residual_k})
    if consts.residual > threshold:
        raise CalibrationError(
            f"校准残差{consts.residual:.3e}超过阈值{threshold}",
            errors=[{"field": "residual", "message": f"C残差{residual_c:.3e}, κ残差{residual_k:.3e}"}],
        )
    return consts


def calibrate(functions: Sequence[GroupFunction], grid: LambdaGrid, cutoff: int, quad: QuadratureSpec,
              max_residual: Optional[float] = None, threads: Optional[int] = None) -> CalibrationConstants:
    """
    在校准函数族上拟合Plancherel常数C与反演常数κ

    Args:
        functions: 至少3个测试函数
        grid: Λ网格
        cutoff: 总阶数截断
        quad: 求积规格
        max_residual: 残差阈值，缺省取配置CALIBRATION_MAX_RESIDUAL

    Returns:
        CalibrationConstants
    """
    if len(functions) < 3:
        raise DegenerateFamilyError("校准至少需要3个函数")
    fields = [fourier_field(f, f.group, grid, cutoff, quad, threads=threads) for f in functions]
    return calibrate_from_fields(functions, fields, quad, max_residual)


# ---------------------------------------------------------------- 对称性检查

def dilation_covariance_residual(f: GroupFunction, r: float, sp: SpectralParameter, cutoff: int,
                                 quad: QuadratureSpec) -> float:
    """
    max |M[f∘δ_r](λ) − r^{-Q}·M[f](r^{-2}λ)|

    左侧在盒δ_{1/r}(box)上求积，右侧在原盒上求积（匹配的求积盒）

    Returns:
        float: 最大逐元残差
    """
    if not r > 0:
        raise ValueError(f"伸缩参数必须为正: r={r}")
    group = f.group
    lhs = gft(DilatedFunction(f, r), sp, cutoff, quad.dilated(1.0 / r))
    sp_scaled = spectral_parameter(group, sp.lam_array / (r * r))
    rhs = gft(f, sp_scaled, cutoff, quad)
    return float(np.max(np.abs(lhs.entries - r ** (-group.Q) * rhs.entries)))


def resolution_residual(f: GroupFunction, sp: SpectralParameter, cutoff: int, quad: QuadratureSpec,
                        margin: int = 8) -> float:
    """
    与加倍分辨率参照的相对偏差

    参照在节点数加倍的盒、加倍的Gauss-Hermite节点与截断N+margin下计算，
    比较公共的(N+1)阶块，除以参照块的最大模
    """
    coarse = gft(f, sp, cutoff, quad)
    fine_quad = QuadratureSpec(box=quad.box.refined(2), hermite_nodes=2 * quad.hermite_nodes)
    fine = gft(f, sp, cutoff + margin, fine_quad)
    dim = coarse.entries.shape[0]
    block = fine.entries[:dim, :dim]
    scale = float(np.max(np.abs(block)))
    if scale == 0.0:
        return float(np.max(np.abs(coarse.entries)))
    return float(np.max(np.abs(coarse.entries - block))) / scale


def adjoint_residual(f: GroupFunction, sp: SpectralParameter, cutoff: int, quad: QuadratureSpec) -> float:
    """max |M[x ↦ conj f(x⁻¹)](λ) − M[f](λ)^*|"""
    lhs = gft(AdjointFunction(f), sp, cutoff, quad)
    rhs = gft(f, sp, cutoff, quad)
    return float(np.max(np.abs(lhs.entries - rhs.entries.conj().T)))


def inversion_errors(field: FourierField, f: GroupFunction, points: Sequence[GroupPoint],
                     consts: CalibrationConstants) -> np.ndarray:
    """各点上 |invert − f| / max|f| 的相对误差（max|f|取各点与单位元中的最大模）"""
    group = f.group
    values = np.array([f.value_at(x) for x in points])
    scale = max(float(np.max(np.abs(values))), abs(f.value_at(GroupPoint.identity(group.n, group.k))))
    approx = np.array([invert(field, x, consts) for x in points])
    return np.abs(approx - values) / scale

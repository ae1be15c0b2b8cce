"""
Hermite谱服务：Hermite函数、缩放Hermite函数、H(η(λ))的本征基与分数幂
"""
import math
from functools import lru_cache
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.linalg import eigh_tridiagonal

from hpw.models.spectral import MultiIndex, SpectralOperator, SpectralParameter
from hpw.services.groups.base_group import BaseGroup
from hpw.utils.logger import Logger
from hpw.utils.response import DimensionMismatchError, SidecarError

logger = Logger(__name__)

PI_QUARTER_INV = math.pi ** -0.25
# 尾数超过该值时整体缩放，指数记入对数尺度
_RESCALE = 1e150
_NODE_TABLE_DTYPE = "<f8"


def hermite_log_table(max_order: int, tau, extra_log=None) -> Tuple[np.ndarray, np.ndarray]:
    """
    带指数跟踪的归一化Hermite递推

    φ_{m+1} = sqrt(2/(m+1))·τ·φ_m − sqrt(m/(m+1))·φ_{m−1}，φ_0 = π^{-1/4}e^{-τ²/2}

    Args:
        max_order: 最高阶
        tau: 自变量（任意形状）
        extra_log: 额外加到对数尺度上的量（与tau同形状），例如 τ²/2

    Returns:
        (mantissa, log_scale): 形状均为(max_order+1, *tau.shape)，φ_m = mantissa·exp(log_scale)
    """
    if max_order < 0:
        raise ValueError("Hermite阶数必须非负")
    tau = np.asarray(tau, dtype=float)
    mant = np.empty((max_order + 1,) + tau.shape)
    logs = np.empty((max_order + 1,) + tau.shape)
    log_scale = -0.5 * tau * tau
    if extra_log is not None:
        log_scale = log_scale + np.asarray(extra_log, dtype=float)
    prev = np.zeros_like(tau)
    cur = np.full_like(tau, PI_QUARTER_INV)
    mant[0] = cur
    logs[0] = log_scale
    for m in range(max_order):
        nxt = math.sqrt(2.0 / (m + 1)) * tau * cur - math.sqrt(m / (m + 1.0)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE
        if np.any(big):
            factor = np.where(big, np.abs(cur), 1.0)
            cur = cur / factor
            prev = prev / factor
            log_scale = log_scale + np.log(factor)
        mant[m + 1] = cur
        logs[m + 1] = log_scale
    return mant, logs


def hermite_table(max_order: int, tau, extra_log=None) -> np.ndarray:
    """所有阶 0..max_order 的φ_m(τ)值，形状(max_order+1, *tau.shape)"""
    mant, logs = hermite_log_table(max_order, tau, extra_log)
    with np.errstate(under="ignore", over="ignore"):
        return mant * np.exp(logs)


def hermite_eval(m: int, tau) -> Union[float, np.ndarray]:
    """
    L²归一化Hermite函数 φ_m(τ)

    Args:
        m: 阶数
        tau: 自变量（标量或数组）

    Returns:
        与tau同形状的值
    """
    values = hermite_table(m, tau)[m]
    return float(values) if np.ndim(values) == 0 else values


def scaled_hermite_eval(m: int, beta: float, tau) -> Union[float, np.ndarray]:
    """φ_{m,β}(τ) = β^{1/4}·φ_m(β^{1/2}τ)"""
    if not beta > 0:
        raise ValueError(f"缩放参数β必须为正: {beta}")
    values = beta ** 0.25 * hermite_table(m, math.sqrt(beta) * np.asarray(tau, dtype=float))[m]
    return float(values) if np.ndim(values) == 0 else values


def ode_residual(m: int, tau, h: float = 1e-4) -> np.ndarray:
    """中心差分下 |φ_m'' − τ²φ_m + (2m+1)φ_m|"""
    tau = np.asarray(tau, dtype=float)
    left, mid, right = (hermite_table(m, tau + s)[m] for s in (-h, 0.0, h))
    second = (left - 2.0 * mid + right) / (h * h)
    return np.abs(second - tau * tau * mid + (2 * m + 1) * mid)


def _compositions(total: int, parts: int):
    # 字典序升序枚举和为total的parts元非负整数组
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=128)
def _multi_index_tuples(n: int, cutoff: int) -> Tuple[Tuple[int, ...], ...]:
    out = []
    for order in range(cutoff + 1):
        out.extend(_compositions(order, n))
    return tuple(out)


def enumerate_multi_indices(n: int, cutoff: int) -> List[MultiIndex]:
    """
    枚举 {α : |α| ≤ N}，先按总阶数再按字典序

    Args:
        n: 维数
        cutoff: 总阶数上界N

    Returns:
        多重指标列表
    """
    if n < 1 or cutoff < 0:
        raise ValueError("维数必须为正且截断阶非负")
    return [MultiIndex(entries=e) for e in _multi_index_tuples(n, cutoff)]


@lru_cache(maxsize=128)
def multi_index_array(n: int, cutoff: int) -> np.ndarray:
    """规范枚举的多重指标数组，形状(binom(N+n,n), n)"""
    arr = np.array(_multi_index_tuples(n, cutoff), dtype=np.int64).reshape(-1, n)
    arr.setflags(write=False)
    return arr


def spectral_parameter(group: BaseGroup, lam) -> SpectralParameter:
    """
    由群描述构造谱参数，并检查η的一阶正齐次性

    Args:
        group: 群描述
        lam: λ ∈ ℝ^k \\ {0}

    Returns:
        SpectralParameter
    """
    lam = group.check_lambda(lam)
    eta = group.eta(lam)
    for r in (0.5, 2.0):
        if not np.allclose(group.eta(r * lam), r * eta, rtol=1e-12, atol=0.0):
            raise ValueError("η(λ)不满足一阶正齐次性")
    basis, orientation = group.adapted_basis(lam)
    return SpectralParameter(
        lam=tuple(lam),
        eta=tuple(eta),
        pfaffian=float(np.prod(eta)),
        orientation=orientation,
        basis=basis,
    )


def phi_alpha_eval(alpha: MultiIndex, sp: SpectralParameter, xi) -> float:
    """Φ_α^{η(λ)}(ξ) = Π_j φ_{α_j, η_j(λ)}(ξ_j)"""
    xi = np.asarray(xi, dtype=float).ravel()
    if alpha.n != sp.n or xi.shape[0] != sp.n:
        raise DimensionMismatchError(f"多重指标、谱参数与ξ的维数不一致: {alpha.n}, {sp.n}, {xi.shape[0]}")
    value = 1.0
    for a, eta, x in zip(alpha.entries, sp.eta, xi):
        value *= scaled_hermite_eval(a, eta, x)
    return float(value)


def zeta(alpha: MultiIndex, sp: SpectralParameter) -> float:
    """ζ(α, λ) = Σ_j (2α_j + 1)·η_j(λ)"""
    if alpha.n != sp.n:
        raise DimensionMismatchError("多重指标与谱参数维数不一致")
    return float(sum((2 * a + 1) * e for a, e in zip(alpha.entries, sp.eta)))


def zeta_vector(sp: SpectralParameter, cutoff: int) -> np.ndarray:
    """按规范枚举排列的全部ζ(α, λ)"""
    alphas = multi_index_array(sp.n, cutoff)
    return (2 * alphas + 1) @ sp.eta_array


def apply_H_power(M: SpectralOperator, beta_half: float) -> SpectralOperator:
    """
    右乘对角阵 ζ(α,λ)^{β/2}，即 F(f)(λ)·H(η(λ))^{β/2}

    Args:
        M: 谱算子
        beta_half: 幂次β/2

    Returns:
        SpectralOperator: 第α列乘以ζ(α,λ)^{β/2}
    """
    if beta_half == 0:
        return M
    factors = np.power(zeta_vector(M.sp, M.cutoff), beta_half)
    return M.with_entries(M.entries * factors[None, :])


def eigenvalue_estimate_ratios(sp: SpectralParameter, cutoff: int) -> np.ndarray:
    """ζ(α,λ) / ((|α|+n)‖λ‖)，Heisenberg与H型群上落在[1, 2]"""
    orders = multi_index_array(sp.n, cutoff).sum(axis=1)
    return zeta_vector(sp, cutoff) / ((orders + sp.n) * sp.lam_norm)


def pfaffian_ratio(sp: SpectralParameter) -> float:
    """|Pf(λ)| / ‖λ‖^n"""
    return sp.pfaffian / sp.lam_norm ** sp.n


def _golub_welsch(count: int) -> np.ndarray:
    if count == 1:
        return np.zeros(1)
    off = np.sqrt(np.arange(1, count) / 2.0)
    nodes = eigh_tridiagonal(np.zeros(count), off, eigvals_only=True)
    # Newton修正：φ_K' = sqrt(2K)·φ_{K−1} − τφ_K，同一尺度下取比值
    for _ in range(2):
        mant, logs = hermite_log_table(count, nodes)
        deriv = math.sqrt(2.0 * count) * mant[count - 1] * np.exp(logs[count - 1] - logs[count]) - nodes * mant[count]
        nodes = nodes - mant[count] / deriv
    return np.sort(nodes)


@lru_cache(maxsize=64)
def _gauss_hermite(count: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes = _golub_welsch(count)
    phi = hermite_table(count - 1, nodes)[count - 1]
    scaled = 1.0 / (count * phi * phi)
    nodes.setflags(write=False)
    scaled.setflags(write=False)
    return nodes, scaled


def gauss_hermite_scaled_weights(count: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gauss-Hermite节点与乘以e^{τ²}后的权重

    由Christoffel恒等式 w_i·e^{x_i²} = 1/(K·φ_{K−1}(x_i)²) 计算，不会下溢

    Returns:
        (nodes, scaled_weights)
    """
    if count < 1:
        raise ValueError("Gauss-Hermite节点数必须至少为1")
    return _gauss_hermite(count)


def gauss_hermite_nodes(count: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    权函数e^{-τ²}的Gauss-Hermite节点与权重，对次数≤2·count−1的多项式精确

    Args:
        count: 节点数

    Returns:
        (nodes, weights)
    """
    nodes, scaled = gauss_hermite_scaled_weights(count)
    with np.errstate(under="ignore"):
        weights = scaled * np.exp(-nodes * nodes)
    return nodes, weights


def node_table_path(directory: Union[str, Path], count: int) -> Path:
    return Path(directory) / f"gauss_hermite_{count}.bin"


def save_node_table(count: int, directory: Union[str, Path]) -> Path:
    """将节点与缩放权重以小端double写入旁路文件"""
    from hpw.database.artifacts import atomic_write_bytes

    nodes, scaled = gauss_hermite_scaled_weights(count)
    payload = np.concatenate([nodes, scaled]).astype(_NODE_TABLE_DTYPE).tobytes()
    path = node_table_path(directory, count)
    atomic_write_bytes(path, payload)
    logger.debug("写入Gauss-Hermite节点表", {"count": count, "path": str(path)})
    return path


def load_node_table(count: int, directory: Union[str, Path]) -> Tuple[np.ndarray, np.ndarray]:
    """读取节点表旁路文件，长度不符时报错"""
    path = node_table_path(directory, count)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise SidecarError(f"无法读取节点表: {path}: {e}")
    data = np.frombuffer(raw, dtype=_NODE_TABLE_DTYPE)
    if data.shape[0] != 2 * count:
        raise SidecarError(f"节点表长度不符: 期望{2 * count}个double，实际{data.shape[0]}")
    return data[:count].astype(float), data[count:].astype(float)


def cached_gauss_hermite(count: int, directory: Optional[Union[str, Path]] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    优先读取旁路节点表，缺失时计算并写入

    Returns:
        (nodes, scaled_weights)
    """
    if directory is None:
        return gauss_hermite_scaled_weights(count)
    if node_table_path(directory, count).exists():
        return load_node_table(count, directory)
    save_node_table(count, directory)
    return gauss_hermite_scaled_weights(count)

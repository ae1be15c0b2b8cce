"""
群模型服务：群律、伸缩、齐次范数与Haar测度求积
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.special import roots_legendre

from hpw.models.group import GroupPoint, HaarBox
from hpw.services.groups.base_group import BaseGroup
from hpw.utils.logger import Logger
from hpw.utils.response import DimensionMismatchError, NonFiniteSampleError

logger = Logger(__name__)

# 函数约定：f(v[..., 2n], t[..., k]) -> 值[...]，支持广播
GroupFunctionLike = Callable[[np.ndarray, np.ndarray], np.ndarray]

# 单次求值的最大采样点数
CHUNK_SIZE = 1 << 20


def _check_point(x: GroupPoint, g: BaseGroup) -> None:
    if x.n != g.n or x.k != g.k:
        raise DimensionMismatchError(f"群元素维数(n={x.n}, k={x.k})与群(n={g.n}, k={g.k})不一致")


def multiply_coords(v1: np.ndarray, t1: np.ndarray, v2: np.ndarray, t2: np.ndarray,
                    g: BaseGroup) -> Tuple[np.ndarray, np.ndarray]:
    """向量化的BCH乘积 (v1,t1)·(v2,t2) = (v1+v2, t1+t2+½c(v1,v2))"""
    v1, v2 = np.asarray(v1, dtype=float), np.asarray(v2, dtype=float)
    t1, t2 = np.asarray(t1, dtype=float), np.asarray(t2, dtype=float)
    return v1 + v2, t1 + t2 + 0.5 * g.commutator(v1, v2)


def inverse_coords(v: np.ndarray, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return -np.asarray(v, dtype=float), -np.asarray(t, dtype=float)


def dilate_coords(v: np.ndarray, t: np.ndarray, r: float) -> Tuple[np.ndarray, np.ndarray]:
    if not r > 0:
        raise ValueError(f"伸缩参数必须为正: r={r}")
    return r * np.asarray(v, dtype=float), (r * r) * np.asarray(t, dtype=float)


def hom_norm_coords(v: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Korányi型齐次范数 (‖v‖⁴ + ‖t‖²)^{1/4}"""
    v2 = np.sum(np.square(v), axis=-1)
    t2 = np.sum(np.square(t), axis=-1)
    return np.power(v2 * v2 + t2, 0.25)


def multiply(a: GroupPoint, b: GroupPoint, g: BaseGroup) -> GroupPoint:
    """
    群乘积

    Args:
        a: 左因子
        b: 右因子
        g: 群描述

    Returns:
        GroupPoint: a·b
    """
    _check_point(a, g)
    _check_point(b, g)
    v, t = multiply_coords(a.v, a.t_array, b.v, b.t_array, g)
    return GroupPoint.from_arrays(v, t)


def inverse(x: GroupPoint) -> GroupPoint:
    """二步幂零群的逆元 (−V, −Z)"""
    return GroupPoint(p=tuple(-c for c in x.p), q=tuple(-c for c in x.q), t=tuple(-c for c in x.t))


def dilate(x: GroupPoint, r: float) -> GroupPoint:
    """δ_r(p, q, t) = (rp, rq, r²t)"""
    if not r > 0:
        raise ValueError(f"伸缩参数必须为正: r={r}")
    return GroupPoint(p=tuple(r * c for c in x.p), q=tuple(r * c for c in x.q), t=tuple(r * r * c for c in x.t))


def hom_norm(x: GroupPoint) -> float:
    return float(hom_norm_coords(x.v, x.t_array))


def random_points(g: BaseGroup, count: int, rng: np.random.Generator,
                  scale: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """在[-scale, scale]立方体中均匀采样count个群元素坐标"""
    v = rng.uniform(-scale, scale, size=(count, 2 * g.n))
    t = rng.uniform(-scale, scale, size=(count, g.k))
    return v, t


@lru_cache(maxsize=64)
def _legendre(count: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = roots_legendre(count)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(count: int, radius: float) -> Tuple[np.ndarray, np.ndarray]:
    """[-radius, radius]上的Gauss-Legendre节点与权重"""
    nodes, weights = _legendre(count)
    return radius * nodes, radius * weights


@dataclass(frozen=True)
class HaarGrid:
    """张量积Haar求积网格（每个第一层轴共用同一组一维节点）"""
    v_nodes: np.ndarray
    v_weights: np.ndarray
    t_nodes: np.ndarray
    t_weights: np.ndarray
    n: int
    k: int

    @property
    def shape(self) -> Tuple[int, ...]:
        return (len(self.v_nodes),) * (2 * self.n) + (len(self.t_nodes),) * self.k

    @property
    def node_count(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64))


def haar_grid(g: BaseGroup, box: HaarBox) -> HaarGrid:
    v_nodes, v_weights = gauss_legendre(box.nodes_v, box.radius_v)
    t_nodes, t_weights = gauss_legendre(box.nodes_t, box.radius_t)
    return HaarGrid(v_nodes, v_weights, t_nodes, t_weights, g.n, g.k)


@dataclass(frozen=True)
class HaarIntegralResult:
    """Haar积分结果：数值、节点数与最外层节点上的最大模（收敛性指标）"""
    value: complex
    node_count: int
    shell_magnitude: float


def iter_grid_chunks(grid: HaarGrid, chunk_size: int = CHUNK_SIZE):
    """
    按块遍历张量网格

    Yields:
        (v, t, w, on_shell): 坐标、乘积权重以及是否位于最外层
    """
    shape = grid.shape
    axes_nodes = [grid.v_nodes] * (2 * grid.n) + [grid.t_nodes] * grid.k
    axes_weights = [grid.v_weights] * (2 * grid.n) + [grid.t_weights] * grid.k
    total = grid.node_count
    for start in range(0, total, chunk_size):
        flat = np.arange(start, min(total, start + chunk_size))
        idx = np.unravel_index(flat, shape)
        coords = np.stack([axes_nodes[d][idx[d]] for d in range(len(shape))], axis=-1)
        w = np.ones(flat.shape[0])
        on_shell = np.zeros(flat.shape[0], dtype=bool)
        for d in range(len(shape)):
            w = w * axes_weights[d][idx[d]]
            on_shell |= (idx[d] == 0) | (idx[d] == shape[d] - 1)
        yield coords[:, : 2 * grid.n], coords[:, 2 * grid.n:], w, on_shell


def haar_integral(f: GroupFunctionLike, g: BaseGroup, box: HaarBox) -> HaarIntegralResult:
    """
    截断盒上张量积Gauss-Legendre求积近似 ∫_G f(x) dx

    Args:
        f: 群上函数
        g: 群描述
        box: 截断盒与节点数

    Returns:
        HaarIntegralResult: 积分值及收敛性指标
    """
    grid = haar_grid(g, box)
    total = 0.0 + 0.0j
    shell = 0.0
    for v, t, w, on_shell in iter_grid_chunks(grid):
        values = np.asarray(f(v, t))
        if not np.all(np.isfinite(values)):
            raise NonFiniteSampleError("Haar求积中出现非有限采样值")
        total += complex(np.sum(w * values))
        if np.any(on_shell):
            shell = max(shell, float(np.max(np.abs(values[on_shell]))))
    logger.debug("Haar求积完成", {"node_count": grid.node_count, "shell": shell})
    return HaarIntegralResult(value=total, node_count=grid.node_count, shell_magnitude=shell)


def homogeneity_residual(f: GroupFunctionLike, g: BaseGroup, box: HaarBox, r: float,
                         reference: Optional[complex] = None) -> float:
    """
    检验 ∫ f∘δ_r = r^{-Q} ∫ f 的相对残差

    f∘δ_r在伸缩后的盒 δ_{1/r}(box) 上求积；参考值缺省时在原盒上对f求积

    Returns:
        float: 相对残差
    """
    def composed(v, t):
        return f(r * v, (r * r) * t)

    lhs = haar_integral(composed, g, box.dilated(1.0 / r)).value
    rhs = reference if reference is not None else haar_integral(f, g, box).value
    rhs = r ** (-g.Q) * rhs
    return abs(lhs - rhs) / max(abs(rhs), 1e-300)


@dataclass(frozen=True)
class QuasiTriangleEstimate:
    """拟三角不等式常数的经验估计"""
    constant: float
    half_sample_constant: float
    samples: int

    @property
    def relative_drift(self) -> float:
        return abs(self.constant - self.half_sample_constant) / self.constant


def quasi_triangle_constant(g: BaseGroup, samples: int, rng: np.random.Generator,
                            scale: float = 2.0) -> QuasiTriangleEstimate:
    """
    估计 |xy| ≤ C(|x| + |y|) 中的常数C

    Args:
        g: 群描述
        samples: 样本对数
        rng: 随机数生成器
        scale: 采样立方体半边长

    Returns:
        QuasiTriangleEstimate: 全样本与前半样本上的估计
    """
    v1, t1 = random_points(g, samples, rng, scale)
    v2, t2 = random_points(g, samples, rng, scale)
    v, t = multiply_coords(v1, t1, v2, t2, g)
    ratio = hom_norm_coords(v, t) / (hom_norm_coords(v1, t1) + hom_norm_coords(v2, t2))
    half = max(1, samples // 2)
    return QuasiTriangleEstimate(
        constant=float(np.max(ratio)),
        half_sample_constant=float(np.max(ratio[:half])),
        samples=samples,
    )


def group_axiom_residuals(g: BaseGroup, samples: int, rng: np.random.Generator) -> List[Tuple[str, float]]:
    """
    在随机样本上计算群公理的最大残差（结合律、逆元、伸缩同态、范数齐次性与对称性）

    Returns:
        (名称, 最大绝对残差) 列表
    """
    va, ta = random_points(g, samples, rng)
    vb, tb = random_points(g, samples, rng)
    vc, tc = random_points(g, samples, rng)
    r = rng.uniform(0.25, 4.0, size=(samples, 1))

    left = multiply_coords(*multiply_coords(va, ta, vb, tb, g), vc, tc, g)
    right = multiply_coords(va, ta, *multiply_coords(vb, tb, vc, tc, g), g)
    assoc = max(np.max(np.abs(left[0] - right[0])), np.max(np.abs(left[1] - right[1])))

    vi, ti = inverse_coords(va, ta)
    ve, te = multiply_coords(va, ta, vi, ti, g)
    inv = max(np.max(np.abs(ve)), np.max(np.abs(te)))

    prod_v, prod_t = multiply_coords(va, ta, vb, tb, g)
    lhs = (r * prod_v, r * r * prod_t)
    rhs = multiply_coords(r * va, r * r * ta, r * vb, r * r * tb, g)
    hom = max(np.max(np.abs(lhs[0] - rhs[0])), np.max(np.abs(lhs[1] - rhs[1])))

    norms = hom_norm_coords(va, ta)
    scaled = hom_norm_coords(r * va, r * r * ta)
    norm_hom = float(np.max(np.abs(scaled - r[:, 0] * norms) / np.maximum(r[:, 0] * norms, 1e-300)))
    norm_sym = float(np.max(np.abs(hom_norm_coords(vi, ti) - norms)))

    return [
        ("associativity", float(assoc)),
        ("inverse", float(inv)),
        ("dilation_homomorphism", float(hom)),
        ("norm_homogeneity", norm_hom),
        ("norm_symmetry", norm_sym),
    ]

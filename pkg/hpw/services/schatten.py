"""
Schatten范数服务：奇异值、Schatten p-范数、框架界与标准正交基幂和
"""
import math
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.linalg import eigh
from scipy.stats import unitary_group

from hpw.utils.response import DimensionMismatchError, NonFiniteSampleError

FROBENIUS_TOLERANCE = 1e-10
ORTHONORMAL_TOLERANCE = 1e-10


class SingularSpectrum(BaseModel):
    """奇异值序列 s_n(T)，非增排列"""
    model_config = ConfigDict(frozen=True)

    values: Tuple[float, ...] = Field(..., description="非增排列的奇异值")
    frobenius_residual: float = Field(0.0, ge=0, description="|‖M‖_F² − Σs²| / ‖M‖_F²")

    @field_validator("values")
    @classmethod
    def check_sorted(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if any(x < 0 for x in v):
            raise ValueError("奇异值必须非负")
        if any(a < b for a, b in zip(v, v[1:])):
            raise ValueError("奇异值必须非增排列")
        return v

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)


def _as_matrix(M) -> np.ndarray:
    arr = np.asarray(M, dtype=complex)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"需要二维矩阵，实际维数{arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteSampleError("矩阵含非有限元素")
    return arr


def singular_values(M) -> SingularSpectrum:
    """
    由Gram矩阵M^*M的对称特征分解计算奇异值

    负的舍入特征值截断为0后开方

    Args:
        M: 复矩阵

    Returns:
        SingularSpectrum: 长度为min(行, 列)，附Frobenius重构残差
    """
    arr = _as_matrix(M)
    if arr.shape[0] >= arr.shape[1]:
        gram = arr.conj().T @ arr
    else:
        gram = arr @ arr.conj().T
    eigvals = eigh(gram, eigvals_only=True)
    values = np.sqrt(np.clip(eigvals, 0.0, None))[::-1]
    frob = float(np.sum(np.abs(arr) ** 2))
    residual = abs(frob - float(np.sum(values ** 2))) / frob if frob > 0 else 0.0
    if residual > FROBENIUS_TOLERANCE:
        raise NonFiniteSampleError(f"奇异值重构残差{residual:.3e}超过{FROBENIUS_TOLERANCE}")
    return SingularSpectrum(values=tuple(float(x) for x in values), frobenius_residual=residual)


def _check_p(p: float) -> None:
    if math.isnan(p) or p < 1:
        raise ValueError(f"Schatten指数必须满足p ≥ 1: p={p}")


def schatten_norm(M, p: float) -> float:
    """
    ‖M‖_{S_p} = ‖{s_n(M)}‖_{ℓ^p}；p = math.inf 时为算子范数

    Args:
        M: 复矩阵
        p: 1 ≤ p ≤ ∞

    Returns:
        float: 范数值
    """
    _check_p(p)
    values = singular_values(M).as_array()
    if values.size == 0:
        return 0.0
    if math.isinf(p):
        return float(values[0])
    top = float(values[0])
    if top == 0.0:
        return 0.0
    return top * float(np.sum((values / top) ** p)) ** (1.0 / p)


def operator_norm(M) -> float:
    return schatten_norm(M, math.inf)


def right_singular_vectors(M) -> np.ndarray:
    """M^*M的特征向量按奇异值降序排列（列为右奇异向量）"""
    arr = _as_matrix(M)
    eigvals, vecs = eigh(arr.conj().T @ arr)
    order = np.argsort(eigvals)[::-1]
    return vecs[:, order]


def _gram_deviation(basis: np.ndarray) -> float:
    gram = basis.conj().T @ basis
    return float(np.max(np.abs(gram - np.eye(gram.shape[0])))) if gram.size else 0.0


def frame_bounds(vectors) -> Tuple[float, float, bool]:
    """
    框架算子 S = Σ f_n f_n^* 的最小与最大特征值

    Args:
        vectors: 每列一个向量

    Returns:
        (C1, C2, spanning): 不张成全空间时C1 = 0且spanning为False
    """
    arr = _as_matrix(vectors)
    if arr.shape[1] == 0:
        return 0.0, 0.0, False
    frame_op = arr @ arr.conj().T
    eigvals = eigh(frame_op, eigvals_only=True)
    top = float(max(eigvals[-1], 0.0))
    low = float(max(eigvals[0], 0.0))
    spanning = low > 1e-12 * max(top, 1.0)
    return (low if spanning else 0.0), top, spanning


def onb_power_sum(M, basis, p: float, mode: str = "onb") -> float:
    """
    Σ_n ‖M f_n‖^p；p = ∞ 时为 max_n ‖M f_n‖

    Args:
        M: 复矩阵
        basis: 每列一个向量
        p: 幂次（p > 2 时与Schatten范数的上确界刻画对应）
        mode: "onb" 要求列标准正交；"frame" 要求上框架界 ≤ 1

    Returns:
        float: 幂和
    """
    arr = _as_matrix(M)
    vecs = _as_matrix(basis)
    if vecs.shape[0] != arr.shape[1]:
        raise DimensionMismatchError("基向量维数与矩阵列数不一致")
    if mode == "onb":
        deviation = _gram_deviation(vecs)
        if deviation > ORTHONORMAL_TOLERANCE:
            raise ValueError(f"基向量不标准正交，Gram偏差{deviation:.3e}")
    elif mode == "frame":
        _, upper, _ = frame_bounds(vecs)
        if upper > 1.0 + ORTHONORMAL_TOLERANCE:
            raise ValueError(f"框架上界{upper:.6f}大于1，不满足上确界刻画的前提")
    else:
        raise ValueError(f"未知模式: {mode}")
    norms = np.linalg.norm(arr @ vecs, axis=0)
    if math.isinf(p):
        return float(np.max(norms)) if norms.size else 0.0
    if not p > 0:
        raise ValueError("幂次必须为正")
    return float(np.sum(norms ** p))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar分布的随机酉矩阵"""
    if dim == 1:
        return np.exp(2j * math.pi * rng.random()).reshape(1, 1)
    return unitary_group.rvs(dim, random_state=rng)


def random_matrices(count: int, dim: int, rng: np.random.Generator) -> List[np.ndarray]:
    """独立复高斯随机矩阵"""
    return [rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)) for _ in range(count)]

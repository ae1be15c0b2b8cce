"""
Métivier群基础描述
提供统一的接口定义，供具体群实现
"""
from abc import ABC, abstractmethod
from typing import Tuple

import numpy as np

from hpw.models.group import GroupSpec
from hpw.utils.response import DimensionMismatchError


class BaseGroup(ABC):
    """Métivier群抽象类：维数(n,k)、结构映射J_λ、频率η_j(λ)与适配基"""

    def __init__(self, spec: GroupSpec):
        """
        初始化群描述

        Args:
            spec: 群的JSON描述
        """
        self.spec = spec
        generators = np.asarray(self._build_generators(), dtype=float)
        generators.setflags(write=False)
        self._generators = generators
        self.validate_generators()

    @property
    @abstractmethod
    def kind(self) -> str:
        """群类型名称"""
        pass

    @abstractmethod
    def _build_generators(self) -> np.ndarray:
        """返回形状为(k, 2n, 2n)的结构矩阵 J_1..J_k"""
        pass

    @abstractmethod
    def eta(self, lam) -> np.ndarray:
        """频率函数 η(λ)，形状(n,)"""
        pass

    @abstractmethod
    def adapted_basis(self, lam) -> Tuple[np.ndarray, str]:
        """
        λ适配的正交基

        Returns:
            (O, orientation): O的列依次为P_1..P_n, Q_1..Q_n，满足⟨J_λP_i,Q_j⟩ = δ_ij η_j(λ)
        """
        pass

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def k(self) -> int:
        return self.spec.k

    @property
    def Q(self) -> int:
        """齐次维数 2n+2k"""
        return 2 * self.n + 2 * self.k

    @property
    def generators(self) -> np.ndarray:
        return self._generators

    def descriptor_hash(self) -> str:
        return self.spec.descriptor_hash()

    def validate_generators(self) -> None:
        g = self._generators
        if g.shape != (self.k, 2 * self.n, 2 * self.n):
            raise DimensionMismatchError(f"结构矩阵形状应为{(self.k, 2 * self.n, 2 * self.n)}，实际为{g.shape}")
        if not np.allclose(g, -np.transpose(g, (0, 2, 1)), atol=1e-12):
            raise ValueError("结构矩阵J_j必须斜对称")

    def check_lambda(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float).ravel()
        if lam.shape[0] != self.k:
            raise DimensionMismatchError(f"λ维数应为{self.k}，实际为{lam.shape[0]}")
        if not np.any(lam != 0.0):
            raise ValueError("λ必须非零")
        return lam

    def j_matrix(self, lam) -> np.ndarray:
        """J_λ = Σ_j λ_j J_j（关于λ线性）"""
        lam = self.check_lambda(lam)
        return np.einsum("j,jab->ab", lam, self._generators)

    def commutator(self, v: np.ndarray, w: np.ndarray) -> np.ndarray:
        """
        第一层的换位子向量 c_j(v, w) = ⟨J_j v, w⟩，支持广播

        Args:
            v: 形状(..., 2n)
            w: 形状(..., 2n)

        Returns:
            形状(..., k)
        """
        return np.einsum("jab,...b,...a->...j", self._generators, v, w)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, k={self.k})"

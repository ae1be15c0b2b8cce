"""
H型群：J_λ由用户给出的反交换斜对称矩阵组装，J_λ² = −‖λ‖²·Id
"""
from typing import Tuple

import numpy as np

from hpw.models.group import GroupSpec, GroupKind
from hpw.services.groups.base_group import BaseGroup

_TOLERANCE = 1e-10


def quaternion_generators(k: int) -> np.ndarray:
    """
    n=2时由四元数左乘给出的H型生成元（k ≤ 3）

    Args:
        k: 中心维数

    Returns:
        形状(k, 4, 4)的数组
    """
    if not 1 <= k <= 3:
        raise ValueError("四元数生成元只支持1 ≤ k ≤ 3")
    # 坐标顺序 (p1, p2, q1, q2)
    gens = [
        [[0, 0, -1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0]],
        [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]],
        [[0, 0, 0, -1], [0, 0, 1, 0], [0, -1, 0, 0], [1, 0, 0, 0]],
    ]
    return np.asarray(gens[:k], dtype=float)


def quaternion_spec(k: int) -> GroupSpec:
    """n=2、中心维数k的四元数H型群描述"""
    return GroupSpec(kind=GroupKind.HTYPE, n=2, k=k, j_generators=quaternion_generators(k).tolist())


class HTypeGroup(BaseGroup):
    """H型群，η_j(λ) = ‖λ‖"""

    @property
    def kind(self) -> str:
        return "htype"

    def _build_generators(self) -> np.ndarray:
        return np.asarray(self.spec.j_generators, dtype=float)

    def validate_generators(self) -> None:
        super().validate_generators()
        g = self._generators
        eye = np.eye(2 * self.n)
        for i in range(self.k):
            for j in range(i, self.k):
                anti = g[i] @ g[j] + g[j] @ g[i]
                target = -2.0 * eye if i == j else np.zeros_like(eye)
                if not np.allclose(anti, target, atol=_TOLERANCE):
                    raise ValueError(f"生成元J_{i + 1}, J_{j + 1}不满足反交换关系 J_iJ_j + J_jJ_i = −2δ_ij")

    def eta(self, lam) -> np.ndarray:
        lam = self.check_lambda(lam)
        return np.full(self.n, float(np.linalg.norm(lam)))

    def adapted_basis(self, lam) -> Tuple[np.ndarray, str]:
        lam = self.check_lambda(lam)
        unit = self.j_matrix(lam) / np.linalg.norm(lam)
        size = 2 * self.n
        chosen = []
        p_cols, q_cols = [], []
        # 贪心Gram-Schmidt：P取标准基投影，Q = J_u P
        for idx in range(size):
            if len(p_cols) == self.n:
                break
            cand = np.zeros(size)
            cand[idx] = 1.0
            for b in chosen:
                cand -= (b @ cand) * b
            norm = np.linalg.norm(cand)
            if norm < 1e-8:
                continue
            p = cand / norm
            q = unit @ p
            p_cols.append(p)
            q_cols.append(q)
            chosen.extend([p, q])
        basis = np.column_stack(p_cols + q_cols)
        return basis, "greedy"

"""
群上测试函数：高斯族（带解析预言值）与通用组合包装
"""
import math
from abc import ABC, abstractmethod
from typing import List, Sequence, Tuple

import numpy as np

from hpw.models.family import FamilySpec, GaussianParams
from hpw.models.group import GroupPoint
from hpw.services.group_model import dilate_coords, inverse_coords, multiply_coords
from hpw.services.groups.base_group import BaseGroup
from hpw.utils.response import DimensionMismatchError


class GroupFunction(ABC):
    """群上的函数，按约定 f(v[..., 2n], t[..., k]) 广播求值"""

    def __init__(self, group: BaseGroup):
        self.group = group

    @abstractmethod
    def __call__(self, v: np.ndarray, t: np.ndarray) -> np.ndarray:
        pass

    def value_at(self, x: GroupPoint) -> complex:
        if x.n != self.group.n or x.k != self.group.k:
            raise DimensionMismatchError("群元素维数与函数所在群不一致")
        return complex(np.asarray(self(x.v, x.t_array)))

    @property
    def is_real(self) -> bool:
        return False

    def scaled(self, c: complex) -> "GroupFunction":
        return ScaledFunction(self, c)

    def dilated(self, r: float) -> "GroupFunction":
        return DilatedFunction(self, r)


class ZeroFunction(GroupFunction):
    def __call__(self, v, t):
        return np.zeros(np.broadcast_shapes(np.shape(v)[:-1], np.shape(t)[:-1]))

    @property
    def is_real(self) -> bool:
        return True


class ScaledFunction(GroupFunction):
    """c·f"""

    def __init__(self, inner: GroupFunction, c: complex):
        super().__init__(inner.group)
        self.inner = inner
        self.c = c

    def __call__(self, v, t):
        return self.c * self.inner(v, t)

    @property
    def is_real(self) -> bool:
        return self.inner.is_real and complex(self.c).imag == 0.0


class DilatedFunction(GroupFunction):
    """f∘δ_r"""

    def __init__(self, inner: GroupFunction, r: float):
        if not r > 0:
            raise ValueError("伸缩参数必须为正")
        super().__init__(inner.group)
        self.inner = inner
        self.r = r

    def __call__(self, v, t):
        return self.inner(*dilate_coords(v, t, self.r))

    @property
    def is_real(self) -> bool:
        return self.inner.is_real


class LinearCombination(GroupFunction):
    """Σ c_i f_i"""

    def __init__(self, terms: Sequence[Tuple[complex, GroupFunction]]):
        if not terms:
            raise ValueError("线性组合不能为空")
        super().__init__(terms[0][1].group)
        self.terms = list(terms)

    def __call__(self, v, t):
        total = None
        for c, f in self.terms:
            value = c * f(v, t)
            total = value if total is None else total + value
        return total


class AdjointFunction(GroupFunction):
    """x ↦ conj(f(x⁻¹))"""

    def __init__(self, inner: GroupFunction):
        super().__init__(inner.group)
        self.inner = inner

    def __call__(self, v, t):
        vi, ti = inverse_coords(v, t)
        return np.conj(self.inner(vi, ti))


class GaussianFunction(GroupFunction):
    """
    高斯测试函数 f(x) = A·exp(−a‖v′‖² − b‖t′‖²)·e^{iμ·t′}，(v′,t′) = x₀⁻¹·x

    左平移与中心调制不改变L^p范数，伸缩在参数上精确闭合
    """

    def __init__(self, group: BaseGroup, params: GaussianParams):
        super().__init__(group)
        self.params = params
        if params.modulation is not None and len(params.modulation) != group.k:
            raise DimensionMismatchError(f"调制频率维数应为{group.k}")
        if params.translation is not None:
            x0 = params.translation
            if x0.n != group.n or x0.k != group.k:
                raise DimensionMismatchError("平移元维数与群不一致")
            self._x0_inv = inverse_coords(x0.v, x0.t_array)
        else:
            self._x0_inv = None
        self._mu = None if params.modulation is None else np.asarray(params.modulation, dtype=float)

    def __call__(self, v, t):
        v = np.asarray(v, dtype=float)
        t = np.asarray(t, dtype=float)
        if self._x0_inv is not None:
            v, t = multiply_coords(self._x0_inv[0], self._x0_inv[1], v, t, self.group)
        p = self.params
        exponent = -p.a * np.sum(v * v, axis=-1) - p.b * np.sum(t * t, axis=-1)
        values = p.amplitude * np.exp(exponent)
        if self._mu is not None:
            values = values * np.exp(1j * (t @ self._mu))
        return values

    @property
    def is_real(self) -> bool:
        return self._mu is None or not np.any(self._mu)

    def lp_norm(self, p: float) -> float:
        """解析L^p范数"""
        n, k = self.group.n, self.group.k
        prm = self.params
        integral = (math.pi / (p * prm.a)) ** n * (math.pi / (p * prm.b)) ** (0.5 * k)
        return abs(prm.amplitude) * integral ** (1.0 / p)

    def l2_norm_squared(self) -> float:
        return self.lp_norm(2.0) ** 2

    def central_fourier_untranslated(self, mu, v) -> complex:
        """无平移时的解析部分中心Fourier变换 f^μ(v)"""
        if self.params.translation is not None:
            raise ValueError("解析公式只适用于无平移的高斯")
        k = self.group.k
        prm = self.params
        shift = np.asarray(mu, dtype=float) + (0.0 if self._mu is None else self._mu)
        v = np.asarray(v, dtype=float)
        return complex(prm.amplitude * np.exp(-prm.a * np.sum(v * v))
                       * (math.pi / prm.b) ** (0.5 * k) * np.exp(-np.sum(shift * shift) / (4.0 * prm.b)))

    def dilated(self, r: float) -> "GaussianFunction":
        """f∘δ_r，仍为高斯"""
        return GaussianFunction(self.group, self.params.dilate_params(r))

    def scaled(self, c: float) -> "GroupFunction":
        if isinstance(c, complex) or not math.isfinite(c) or c == 0:
            return ScaledFunction(self, c)
        return GaussianFunction(self.group, self.params.model_copy(update={"amplitude": self.params.amplitude * c}))

    def normalized(self, b_ref: float = 1.0) -> Tuple["GaussianFunction", float]:
        """
        伸缩到中心衰减率为b_ref的代表元

        Returns:
            (f∘δ_r, r)，r = (b_ref/b)^{1/4}
        """
        r = (b_ref / self.params.b) ** 0.25
        return self.dilated(r), r


def materialize_members(group: BaseGroup, spec: FamilySpec) -> List[Tuple[int, float, GaussianFunction]]:
    """
    展开族成员×伸缩轴

    Returns:
        (成员序号, 伸缩r, f∘δ_{1/r}) 列表，按(成员序号, r)排序
    """
    out = []
    for index, params in enumerate(spec.members):
        base = GaussianFunction(group, params)
        for r in sorted(spec.dilations):
            out.append((index, r, base.dilated(1.0 / r)))
    return out


def materialize(group: BaseGroup, params_list: Sequence[GaussianParams]) -> List[GaussianFunction]:
    return [GaussianFunction(group, p) for p in params_list]

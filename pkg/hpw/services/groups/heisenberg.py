"""
Heisenberg群 H^n
"""
from typing import Tuple

import numpy as np

from hpw.services.groups.base_group import BaseGroup


class HeisenbergGroup(BaseGroup):
    """Heisenberg群，换位子 c(v, v') = p·q' − q·p'"""

    @property
    def kind(self) -> str:
        return "heisenberg"

    def _build_generators(self) -> np.ndarray:
        n = self.n
        eye = np.eye(n)
        zero = np.zeros((n, n))
        j = np.block([[zero, -eye], [eye, zero]])
        return j[None, :, :]

    def eta(self, lam) -> np.ndarray:
        lam = self.check_lambda(lam)
        return np.full(self.n, abs(lam[0]))

    def adapted_basis(self, lam) -> Tuple[np.ndarray, str]:
        lam = self.check_lambda(lam)
        if lam[0] > 0:
            return np.eye(2 * self.n), "standard"
        # λ < 0：交换P与Q，η仍取|λ|
        n = self.n
        swap = np.zeros((2 * n, 2 * n))
        swap[n:, :n] = np.eye(n)
        swap[:n, n:] = np.eye(n)
        return swap, "swapped"

"""
Schatten范数与标准正交基幂和测试
"""
import math

import numpy as np
import pytest

from hpw.services.schatten import (
    frame_bounds,
    onb_power_sum,
    operator_norm,
    random_matrices,
    random_unitary,
    right_singular_vectors,
    schatten_norm,
    singular_values,
)
from hpw.utils.response import DimensionMismatchError, NonFiniteSampleError


def test_singular_values_of_diagonal_matrix():
    spectrum = singular_values(np.diag([3.0, -2.0, 1.0]))
    assert np.allclose(spectrum.values, [3.0, 2.0, 1.0], atol=1e-12)
    assert spectrum.frobenius_residual <= 1e-12


def test_rectangular_matrix_uses_smaller_side(rng):
    M = rng.standard_normal((3, 5))
    spectrum = singular_values(M)
    assert len(spectrum.values) == 3
    assert np.allclose(spectrum.values, np.linalg.svd(M, compute_uv=False), atol=1e-10)


def test_s2_is_frobenius_and_sinf_is_operator_norm(rng):
    for M in random_matrices(5, 6, rng):
        assert math.isclose(schatten_norm(M, 2.0), np.linalg.norm(M, "fro"), rel_tol=1e-10)
        assert math.isclose(operator_norm(M), np.linalg.norm(M, 2), rel_tol=1e-10)
        assert math.isclose(schatten_norm(M, 1.0), np.linalg.norm(M, "nuc"), rel_tol=1e-10)


def test_schatten_norm_decreases_in_p(rng):
    M = random_matrices(1, 7, rng)[0]
    values = [schatten_norm(M, p) for p in (1.0, 1.5, 2.0, 3.0, 8.0, math.inf)]
    assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))


def test_zero_matrix():
    assert schatten_norm(np.zeros((3, 3)), 1.5) == 0.0


def test_invalid_inputs_are_rejected():
    with pytest.raises(ValueError):
        schatten_norm(np.eye(2), 0.5)
    with pytest.raises(DimensionMismatchError):
        singular_values(np.ones(3))
    with pytest.raises(NonFiniteSampleError):
        singular_values(np.array([[1.0, np.nan], [0.0, 1.0]]))


@pytest.mark.parametrize("p", [2.5, 3.0, 6.0])
def test_onb_power_sum_is_bounded_by_schatten_norm(rng, p):
    M = random_matrices(1, 6, rng)[0]
    bound = schatten_norm(M, p) ** p
    for _ in range(10):
        assert onb_power_sum(M, random_unitary(6, rng), p) <= bound * (1.0 + 1e-9)
    # 右奇异向量取到上确界
    assert math.isclose(onb_power_sum(M, right_singular_vectors(M), p), bound, rel_tol=1e-9)


def test_onb_power_sum_reverses_below_two(rng):
    M = random_matrices(1, 5, rng)[0]
    p = 1.5
    bound = schatten_norm(M, p) ** p
    for _ in range(10):
        assert onb_power_sum(M, random_unitary(5, rng), p) >= bound * (1.0 - 1e-9)


def test_onb_power_sum_at_two_is_basis_independent(rng):
    M = random_matrices(1, 4, rng)[0]
    expected = np.linalg.norm(M, "fro") ** 2
    for _ in range(5):
        assert math.isclose(onb_power_sum(M, random_unitary(4, rng), 2.0), expected, rel_tol=1e-10)


def test_onb_power_sum_infinity_and_mode_checks(rng):
    M = np.diag([1.0, 4.0])
    assert onb_power_sum(M, np.eye(2), math.inf) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        onb_power_sum(M, 2.0 * np.eye(2), 3.0)
    with pytest.raises(ValueError):
        onb_power_sum(M, np.eye(2), 3.0, mode="basis")
    with pytest.raises(DimensionMismatchError):
        onb_power_sum(M, np.eye(3), 3.0)
    # 上框架界 ≤ 1 的框架同样满足上确界刻画的前提
    half_frame = np.hstack([np.eye(2), np.eye(2)]) / math.sqrt(2.0)
    assert onb_power_sum(M, half_frame, 3.0, mode="frame") <= schatten_norm(M, 3.0) ** 3 + 1e-9


def test_frame_bounds(rng):
    low, high, spanning = frame_bounds(random_unitary(4, rng))
    assert spanning and abs(low - 1.0) < 1e-10 and abs(high - 1.0) < 1e-10
    tight = np.hstack([np.eye(3), np.eye(3)])
    low, high, spanning = frame_bounds(tight)
    assert spanning and low == pytest.approx(2.0) and high == pytest.approx(2.0)
    low, high, spanning = frame_bounds(np.eye(3)[:, :2])
    assert not spanning and low == 0.0 and high == pytest.approx(1.0)
    assert frame_bounds(np.zeros((3, 0))) == (0.0, 0.0, False)


def test_random_unitary_is_unitary(rng):
    for dim in (1, 2, 5):
        U = random_unitary(dim, rng)
        assert np.allclose(U.conj().T @ U, np.eye(dim), atol=1e-12)

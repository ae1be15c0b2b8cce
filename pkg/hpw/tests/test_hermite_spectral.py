"""
Hermite函数与谱参数测试
"""
import math

import numpy as np
import pytest
from scipy.special import comb, gamma as gamma_fn

from hpw.models.spectral import SpectralOperator, basis_dimension
from hpw.services.hermite_spectral import (
    apply_H_power,
    cached_gauss_hermite,
    eigenvalue_estimate_ratios,
    enumerate_multi_indices,
    gauss_hermite_nodes,
    hermite_eval,
    hermite_log_table,
    hermite_table,
    load_node_table,
    multi_index_array,
    node_table_path,
    ode_residual,
    phi_alpha_eval,
    pfaffian_ratio,
    save_node_table,
    scaled_hermite_eval,
    spectral_parameter,
    zeta,
    zeta_vector,
)
from hpw.utils.response import DimensionMismatchError, SidecarError


def test_low_orders_match_closed_form():
    tau = np.linspace(-4.0, 4.0, 17)
    table = hermite_table(2, tau)
    phi0 = math.pi ** -0.25 * np.exp(-0.5 * tau ** 2)
    assert table.shape == (3, 17)
    assert np.allclose(table[0], phi0, atol=1e-15)
    assert np.allclose(table[1], math.sqrt(2.0) * tau * phi0, atol=1e-15)
    assert np.allclose(table[2], (2.0 * tau ** 2 - 1.0) / math.sqrt(2.0) * phi0, atol=1e-14)


def test_high_orders_stay_finite_far_out():
    table = hermite_table(400, np.array([0.0, 25.0, 60.0]))
    assert np.all(np.isfinite(table))
    assert abs(table[400, 2]) < 1e-100


@pytest.mark.parametrize("eta", [0.5, 1.0, 3.0])
def test_scaled_hermite_functions_are_orthonormal(eta):
    s, w = cached_gauss_hermite(64)
    xi = s / math.sqrt(eta)
    values = np.array([scaled_hermite_eval(m, eta, xi) for m in range(9)])
    gram = (values * (w / math.sqrt(eta))[None, :]) @ values.T
    assert np.max(np.abs(gram - np.eye(9))) <= 1e-10


def test_hermite_ode_residual_is_small():
    tau = np.linspace(-5.0, 5.0, 41)
    for m in (0, 5, 20):
        assert float(np.max(ode_residual(m, tau))) < 1e-4


def test_gauss_hermite_integrates_even_moments():
    nodes, weights = gauss_hermite_nodes(20)
    for j in range(20):
        exact = gamma_fn(j + 0.5)
        assert abs(np.sum(weights * nodes ** (2 * j)) - exact) / exact < 1e-10
    assert abs(np.sum(weights * nodes ** 3)) < 1e-12


def test_node_table_sidecar(tmp_path):
    path = save_node_table(12, tmp_path)
    assert path == node_table_path(tmp_path, 12)
    nodes, scaled = load_node_table(12, tmp_path)
    ref_nodes, ref_scaled = cached_gauss_hermite(12)
    assert np.array_equal(nodes, ref_nodes) and np.array_equal(scaled, ref_scaled)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(SidecarError):
        load_node_table(12, tmp_path)


def test_multi_index_enumeration():
    indices = enumerate_multi_indices(2, 4)
    assert len(indices) == basis_dimension(2, 4) == comb(6, 2, exact=True)
    assert indices[0].entries == (0, 0)
    orders = [a.order for a in indices]
    assert orders == sorted(orders)
    assert multi_index_array(2, 4).shape == (15, 2)


def test_zeta_and_eigenvalue_ratios_heisenberg(heisenberg):
    sp = spectral_parameter(heisenberg, [-0.4])
    assert sp.eta == (0.4,)
    assert np.allclose(zeta_vector(sp, 3), [0.4, 1.2, 2.0, 2.8])
    ratios = eigenvalue_estimate_ratios(sp, 30)
    assert ratios.min() >= 1.0 - 1e-12 and ratios.max() <= 2.0 + 1e-12
    assert abs(pfaffian_ratio(sp) - 1.0) < 1e-15


def test_htype_spectral_parameter(quaternion_group):
    sp = spectral_parameter(quaternion_group, [0.3, -0.4, 1.2])
    assert np.allclose(sp.eta, [1.3, 1.3])
    assert abs(pfaffian_ratio(sp) - 1.0) < 1e-12
    assert np.allclose(sp.basis.T @ sp.basis, np.eye(4), atol=1e-12)
    ratios = eigenvalue_estimate_ratios(sp, 30)
    assert ratios.min() >= 1.0 - 1e-12 and ratios.max() <= 2.0 + 1e-12


def test_spectral_parameter_rejects_zero(heisenberg):
    with pytest.raises(ValueError):
        spectral_parameter(heisenberg, [0.0])


def test_single_hermite_function_and_product_basis(heisenberg, quaternion_group):
    assert hermite_eval(0, 0.0) == pytest.approx(math.pi ** -0.25, rel=1e-14)
    assert hermite_eval(3, np.linspace(-2.0, 2.0, 7)).shape == (7,)
    sp = spectral_parameter(heisenberg, [2.0])
    alpha = enumerate_multi_indices(1, 3)[2]
    assert alpha.entries == (2,)
    assert phi_alpha_eval(alpha, sp, [0.3]) == pytest.approx(scaled_hermite_eval(2, 2.0, 0.3), rel=1e-14)
    assert zeta(alpha, sp) == pytest.approx(10.0)
    assert zeta(alpha, sp) == pytest.approx(zeta_vector(sp, 3)[2])
    other = spectral_parameter(quaternion_group, [0.3, -0.4, 1.2])
    with pytest.raises(DimensionMismatchError):
        zeta(alpha, other)
    with pytest.raises(DimensionMismatchError):
        phi_alpha_eval(alpha, other, [0.3, 0.1])


def test_log_table_reassembles_to_the_plain_table():
    tau = np.linspace(-3.0, 3.0, 13)
    mant, logs = hermite_log_table(6, tau)
    assert mant.shape == logs.shape == (7, 13)
    assert np.allclose(mant * np.exp(logs), hermite_table(6, tau), rtol=1e-12, atol=1e-15)
    far_mant, far_logs = hermite_log_table(10, np.array([60.0]))
    assert np.all(np.isfinite(far_mant)) and far_logs[10, 0] < -1000.0


def test_H_power_on_identity_gives_zeta_diagonal(heisenberg, quaternion_group):
    sp = spectral_parameter(heisenberg, [1.0])
    identity = SpectralOperator(sp=sp, cutoff=6, entries=np.eye(7))
    assert np.allclose(apply_H_power(identity, 1.0).entries, np.diag([1.0, 3.0, 5.0, 7.0, 9.0, 11.0, 13.0]),
                       rtol=0, atol=1e-14)
    sp = spectral_parameter(quaternion_group, [0.3, -0.4, 1.2])
    dim = basis_dimension(quaternion_group.n, 4)
    result = apply_H_power(SpectralOperator(sp=sp, cutoff=4, entries=np.eye(dim)), 1.0)
    assert np.allclose(result.entries, np.diag(zeta_vector(sp, 4)), rtol=1e-14, atol=0)
    assert apply_H_power(identity, 0.0) is identity


def test_H_power_round_trip(heisenberg, rng):
    sp = spectral_parameter(heisenberg, [-0.6])
    entries = rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9))
    op = SpectralOperator(sp=sp, cutoff=8, entries=entries)
    back = apply_H_power(apply_H_power(op, 0.7), -0.7)
    assert np.max(np.abs(back.entries - entries)) <= 1e-12 * np.max(np.abs(entries))
    squared = apply_H_power(apply_H_power(op, 0.5), 0.5)
    assert np.allclose(squared.entries, apply_H_power(op, 1.0).entries, rtol=1e-13, atol=0)

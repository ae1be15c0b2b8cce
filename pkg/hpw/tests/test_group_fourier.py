"""
群Fourier变换、Plancherel与反演测试
"""
import math

import numpy as np
import pytest

from hpw.models.group import GroupPoint
from hpw.models.family import GaussianParams
from hpw.models.run_config import LambdaGridSpec
from hpw.models.spectral import CalibrationConstants, FourierField
from hpw.services.function_family import GaussianFunction, materialize
from hpw.services.group_fourier import (
    adjoint_residual,
    calibrate,
    calibrate_from_fields,
    dilation_covariance_residual,
    fourier_field,
    gft,
    invert,
    lambda_grid,
    outer_panel_share,
    partial_central_fourier,
    plancherel_sum,
    inversion_errors,
    rep_apply,
    rep_leakage_residual,
    rep_matrix,
    resolution_residual,
)
from hpw.services.group_model import random_points
from hpw.services.hermite_spectral import multi_index_array, spectral_parameter
from hpw.utils.response import DegenerateFamilyError, DimensionMismatchError, EmptyFieldError

from hpw.tests.conftest import SMALL_CUTOFF


@pytest.fixture(scope="module")
def held_out_fields(heisenberg, default_config, default_setup):
    grid, quad = default_setup
    functions = materialize(heisenberg, default_config.family.held_out)
    return [(f, fourier_field(f, heisenberg, grid, default_config.cutoff, quad)) for f in functions]


@pytest.fixture(scope="module")
def small_calibration_fields(heisenberg, default_config, small_grid, small_quad):
    functions = materialize(heisenberg, default_config.family.calibration)
    return functions, [fourier_field(f, heisenberg, small_grid, SMALL_CUTOFF, small_quad) for f in functions]


def test_lambda_grid_covers_symmetric_interval(heisenberg):
    spec = LambdaGridSpec(lambda_min=0.05, lambda_max=8.0, nodes=64, origin_panel_nodes=6)
    grid = lambda_grid(heisenberg, spec)
    assert grid.size == 64
    assert np.allclose(grid.lambdas[:, 0], -grid.lambdas[::-1, 0])
    assert np.all(grid.weights > 0)
    assert abs(grid.weights.sum() - 2 * 8.0) < 1e-10
    assert grid.panels.min() == 0
    no_origin = lambda_grid(heisenberg, spec.model_copy(update={"origin_panel_nodes": 0}))
    assert abs(no_origin.weights.sum() - 2 * (8.0 - 0.05)) < 1e-10


def test_lambda_grid_scaling(heisenberg):
    grid = lambda_grid(heisenberg, LambdaGridSpec())
    scaled = grid.scaled(0.25)
    assert np.allclose(scaled.lambdas, 0.25 * grid.lambdas)
    assert np.allclose(scaled.weights, 0.25 * grid.weights)
    assert scaled.spec["scale"] == 0.25


def test_lambda_grid_for_three_dimensional_center(quaternion_group):
    spec = LambdaGridSpec(lambda_min=0.1, lambda_max=2.0, nodes=64, origin_panel_nodes=4, angular_nodes=3)
    grid = lambda_grid(quaternion_group, spec)
    assert grid.k == 3
    assert grid.size == 32 * 3 * 6
    # ∫_{|λ|≤2} dλ = 4π·8/3
    assert abs(grid.weights.sum() - 4.0 * math.pi * 8.0 / 3.0) < 1e-8


def test_rep_matrix_identity_and_central_character(heisenberg, rng):
    sp = spectral_parameter(heisenberg, [1.3])
    dim = multi_index_array(1, 12).shape[0]
    coeffs = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    assert np.max(np.abs(rep_apply(GroupPoint.identity(1, 1), sp, coeffs) - coeffs)) < 1e-10
    central = GroupPoint(p=(0.0,), q=(0.0,), t=(0.7,))
    expected = np.exp(1j * 1.3 * 0.7) * coeffs
    assert np.max(np.abs(rep_apply(central, sp, coeffs) - expected)) < 1e-10


def test_rep_matrix_is_nearly_unitary_on_low_columns(heisenberg):
    sp = spectral_parameter(heisenberg, [1.0])
    x = GroupPoint(p=(0.2,), q=(-0.25,), t=(1.0,))
    rep = rep_matrix(x, sp, 20)
    low = multi_index_array(1, 20).sum(axis=1) <= 12
    norms = np.linalg.norm(rep[:, low], axis=0)
    assert np.max(np.abs(norms - 1.0)) < 1e-4


def test_rep_leakage_reconciles_with_wider_cutoff(heisenberg, rng):
    sp = spectral_parameter(heisenberg, [1.0])
    v, t = random_points(heisenberg, 3, rng, scale=1.0)
    corner = GroupPoint(p=(1.0,), q=(-1.0,), t=(0.5,))
    for x in [GroupPoint.from_arrays(v[i], t[i]) for i in range(3)] + [corner]:
        report = rep_leakage_residual(x, sp, 20)
        assert report["leakage"] >= -1e-10
        assert report["residual"] <= 1e-8
    # 低阶列在单位元附近几乎不泄漏
    near = rep_leakage_residual(GroupPoint(p=(0.2,), q=(-0.25,), t=(1.0,)), sp, 20)
    assert near["leakage"] < 1e-4


def test_rep_matrix_inverse_is_adjoint(heisenberg):
    sp = spectral_parameter(heisenberg, [-0.8])
    x = GroupPoint(p=(0.4,), q=(0.1,), t=(-0.3,))
    x_inv = GroupPoint(p=(-0.4,), q=(-0.1,), t=(0.3,))
    assert np.max(np.abs(rep_matrix(x_inv, sp, 10) - rep_matrix(x, sp, 10).conj().T)) < 1e-12


def test_partial_central_fourier_of_gaussian(gaussian):
    pq = np.array([0.5, -1.0])
    value = partial_central_fourier(gaussian, [0.7], pq)
    assert abs(value - gaussian.central_fourier_untranslated([0.7], pq)) < 1e-12


@pytest.mark.parametrize("r,lam", [(2.0, 1.0), (0.5, 2.0)])
def test_dilation_covariance(gaussian, heisenberg, small_quad, r, lam):
    sp = spectral_parameter(heisenberg, [lam])
    assert dilation_covariance_residual(gaussian, r, sp, SMALL_CUTOFF, small_quad) <= 1e-6


def test_adjoint_identity(gaussian, heisenberg, small_quad):
    sp = spectral_parameter(heisenberg, [0.9])
    assert adjoint_residual(gaussian, sp, SMALL_CUTOFF, small_quad) <= 1e-8


def test_gft_metadata_and_hs_capture(gaussian, heisenberg, small_quad):
    op = gft(gaussian, spectral_parameter(heisenberg, [1.0]), SMALL_CUTOFF, small_quad)
    assert op.entries.shape == (SMALL_CUTOFF + 1, SMALL_CUTOFF + 1)
    assert op.meta.cutoff == SMALL_CUTOFF
    assert op.meta.hermite_nodes == small_quad.hermite_nodes
    assert 0.0 < op.meta.hs_capture <= 1.0 + 1e-6


def test_gft_of_real_radial_gaussian_is_nearly_diagonal(gaussian, heisenberg, small_quad):
    op = gft(gaussian, spectral_parameter(heisenberg, [1.0]), SMALL_CUTOFF, small_quad)
    off = op.entries - np.diag(np.diag(op.entries))
    assert np.max(np.abs(off)) < 1e-5 * np.max(np.abs(op.entries))
    assert np.max(np.abs(op.entries.imag)) < 1e-12 * np.max(np.abs(op.entries))


def test_plancherel_with_analytic_constant(gaussian, default_field, analytic_consts):
    mass = plancherel_sum(default_field, analytic_consts)
    assert abs(mass / gaussian.l2_norm_squared() - 1.0) < 2e-2


def test_truncation_diagnostics(default_field, default_setup):
    grid, _ = default_setup
    share = outer_panel_share(default_field, grid)
    assert share["outer"] < 1e-5
    assert 0.0 < share["inner"] < 1.0
    moderate = [op for op in default_field.ops if op.sp.lam_norm <= 2.0]
    assert moderate and all(op.meta.hs_capture <= 1.0 + 1e-6 for op in moderate)


def test_inversion_at_identity(gaussian, default_field, analytic_consts):
    value = invert(default_field, GroupPoint.identity(1, 1), analytic_consts)
    assert abs(value - 1.0) < 3e-2
    assert abs(value.imag) < 1e-10


def test_calibration_recovers_analytic_constant(heisenberg, default_config, default_setup):
    grid, quad = default_setup
    functions = materialize(heisenberg, default_config.family.calibration)
    consts = calibrate(functions, grid, default_config.cutoff, quad)
    assert consts.family_size == 3
    assert consts.residual < 5e-2
    assert abs(consts.plancherel_c / consts.analytic_reference - 1.0) < 2e-2
    assert abs(consts.inversion_kappa / consts.analytic_reference - 1.0) < 3e-2
    assert len(consts.per_function) == 3


def test_gft_matches_double_resolution_reference(gaussian, heisenberg, default_config):
    sp = spectral_parameter(heisenberg, [1.0])
    residual = resolution_residual(gaussian, sp, default_config.cutoff, default_config.quadrature())
    assert residual <= 1e-6


def test_plancherel_on_held_out_family(held_out_fields, analytic_consts):
    assert len(held_out_fields) == 10
    for f, field in held_out_fields:
        mass = plancherel_sum(field, analytic_consts)
        assert abs(mass / f.l2_norm_squared() - 1.0) < 2e-2, f.params


def test_inversion_at_random_points(gaussian, heisenberg, default_field, analytic_consts, rng):
    v, t = random_points(heisenberg, 20, rng, scale=1.0)
    points = [GroupPoint.from_arrays(v[i], t[i]) for i in range(20)]
    errors = inversion_errors(default_field, gaussian, points, analytic_consts)
    assert errors.shape == (20,)
    assert float(np.max(errors)) < 3e-2
    # 实函数的反演值为实数
    assert max(abs(invert(default_field, x, analytic_consts).imag) for x in points) <= 1e-6


def test_doubling_weights_halves_constants(small_calibration_fields, small_quad):
    functions, fields = small_calibration_fields
    consts = calibrate_from_fields(functions, fields, small_quad, max_residual=1.0)
    doubled = calibrate_from_fields(functions, [f.scaled_weights(2.0) for f in fields], small_quad, max_residual=1.0)
    assert doubled.plancherel_c == pytest.approx(consts.plancherel_c / 2.0, rel=1e-12)
    assert doubled.inversion_kappa == pytest.approx(consts.inversion_kappa / 2.0, rel=1e-12)
    assert doubled.residual == pytest.approx(consts.residual, abs=1e-12)


def test_calibration_is_flat_along_dilations(gaussian, heisenberg, small_grid, small_quad):
    base_field = fourier_field(gaussian, heisenberg, small_grid, SMALL_CUTOFF, small_quad)
    reference = calibrate_from_fields([gaussian] * 3, [base_field] * 3, small_quad, max_residual=1.0)
    dilates, fields = [], []
    for r in (0.8, 1.0, 1.25):
        f = gaussian.dilated(1.0 / r)
        dilates.append(f)
        fields.append(fourier_field(f, heisenberg, small_grid.scaled(r ** -2), SMALL_CUTOFF, small_quad.dilated(r)))
    consts = calibrate_from_fields(dilates, fields, small_quad, max_residual=1.0)
    assert abs(consts.plancherel_c / reference.plancherel_c - 1.0) < 1e-3


def test_calibration_requires_three_functions(gaussian, heisenberg, small_grid, small_quad):
    with pytest.raises(DegenerateFamilyError):
        calibrate([gaussian, gaussian], small_grid, SMALL_CUTOFF, small_quad)
    with pytest.raises(DegenerateFamilyError):
        calibrate_from_fields([gaussian] * 3, [FourierField()] * 2, small_quad)


def test_field_requires_matching_group(gaussian, quaternion_group, small_grid, small_quad):
    with pytest.raises(DimensionMismatchError):
        fourier_field(gaussian, quaternion_group, small_grid, SMALL_CUTOFF, small_quad)


def test_empty_field_is_rejected():
    with pytest.raises(EmptyFieldError):
        plancherel_sum(FourierField(), CalibrationConstants(plancherel_c=1.0, inversion_kappa=1.0))


def test_small_field_uses_threads_deterministically(heisenberg, small_grid, small_quad):
    f = GaussianFunction(heisenberg, GaussianParams(a=0.2, b=1.5, modulation=[0.3]))
    serial = fourier_field(f, heisenberg, small_grid, SMALL_CUTOFF, small_quad, threads=1)
    pooled = fourier_field(f, heisenberg, small_grid, SMALL_CUTOFF, small_quad, threads=4)
    for a, b in zip(serial.ops, pooled.ops):
        assert np.array_equal(a.entries, b.entries)
    assert np.array_equal(serial.weights, pooled.weights)

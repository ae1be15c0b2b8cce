"""
群模型测试
"""
import math

import numpy as np
import pytest

from hpw.models.group import GroupPoint, GroupSpec, HaarBox
from hpw.services.group_model import (
    dilate,
    dilate_coords,
    group_axiom_residuals,
    haar_integral,
    hom_norm,
    homogeneity_residual,
    inverse,
    multiply,
    quasi_triangle_constant,
)
from hpw.services.groups.group_factory import GroupFactory
from hpw.services.groups.htype import quaternion_generators
from hpw.utils.response import DimensionMismatchError, UsageError


@pytest.mark.parametrize("group_name", ["heisenberg", "quaternion_group"])
def test_group_axioms_hold_to_machine_precision(group_name, request, rng):
    group = request.getfixturevalue(group_name)
    residuals = dict(group_axiom_residuals(group, 2000, rng))
    assert set(residuals) == {"associativity", "inverse", "dilation_homomorphism", "norm_homogeneity",
                              "norm_symmetry"}
    for name, value in residuals.items():
        assert value <= 1e-12, name


def test_heisenberg_product_matches_commutator(heisenberg):
    x = GroupPoint(p=(1.0,), q=(0.0,), t=(0.0,))
    y = GroupPoint(p=(0.0,), q=(1.0,), t=(0.0,))
    xy = multiply(x, y, heisenberg)
    yx = multiply(y, x, heisenberg)
    assert xy.p == (1.0,) and xy.q == (1.0,)
    assert abs(xy.t[0] + yx.t[0]) < 1e-15
    assert abs(abs(xy.t[0] - yx.t[0]) - 1.0) < 1e-15


def test_inverse_and_dilation(heisenberg):
    x = GroupPoint(p=(0.3,), q=(-1.2,), t=(0.7,))
    e = multiply(x, inverse(x), heisenberg)
    assert max(abs(c) for c in e.p + e.q + e.t) < 1e-15
    assert math.isclose(hom_norm(dilate(x, 3.0)), 3.0 * hom_norm(x), rel_tol=1e-14)
    assert hom_norm(GroupPoint.identity(1, 1)) == 0.0


def test_dimension_mismatch_is_rejected(heisenberg):
    x = GroupPoint(p=(0.0, 0.0), q=(0.0, 0.0), t=(0.0,))
    with pytest.raises(DimensionMismatchError):
        multiply(x, x, heisenberg)


def test_haar_integral_of_gaussian_matches_closed_form(gaussian, heisenberg):
    result = haar_integral(gaussian, heisenberg, HaarBox())
    assert abs(result.value.real / gaussian.lp_norm(1.0) - 1.0) < 1e-8
    assert result.shell_magnitude < 1e-6


@pytest.mark.parametrize("r", [0.5, 2.0])
def test_haar_measure_scales_with_homogeneous_dimension(gaussian, heisenberg, r):
    residual = homogeneity_residual(gaussian, heisenberg, HaarBox(), r, reference=gaussian.lp_norm(1.0))
    assert residual <= 1e-6


def test_quasi_triangle_estimate(heisenberg, rng):
    estimate = quasi_triangle_constant(heisenberg, 4000, rng)
    assert estimate.samples == 4000
    assert estimate.constant >= estimate.half_sample_constant > 0
    assert estimate.relative_drift < 0.5


def test_factory_rejects_invalid_descriptors():
    with pytest.raises(UsageError):
        GroupFactory.create({"kind": "heisenberg", "n": 1, "k": 2})
    with pytest.raises(UsageError):
        GroupFactory.create({"kind": "htype", "n": 2, "k": 1})
    with pytest.raises(UsageError):
        GroupFactory.from_json("/nonexistent/group.json")


def test_htype_from_json_and_eta(quaternion_group):
    spec = GroupSpec(kind="htype", n=2, k=2, j_generators=quaternion_generators(2).tolist())
    group = GroupFactory.from_json(spec.model_dump_json())
    assert group.Q == 2 * 2 + 2 * 2
    lam = np.array([0.6, 0.8])
    assert np.allclose(group.eta(lam), [1.0, 1.0])
    assert quaternion_group.descriptor_hash() != group.descriptor_hash()


def test_coordinate_dilation_matches_point_dilation():
    x = GroupPoint(p=(0.3, 1.1), q=(-1.2, 0.4), t=(0.7, -0.2, 0.05))
    v, t = dilate_coords(x.v, x.t_array, 2.5)
    y = dilate(x, 2.5)
    assert np.allclose(v, y.v, rtol=0, atol=1e-15)
    assert np.allclose(t, y.t_array, rtol=0, atol=1e-15)
    with pytest.raises(ValueError):
        dilate_coords(x.v, x.t_array, 0.0)

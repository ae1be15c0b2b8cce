"""
测试共享夹具：群、求积规格、高斯测试函数与默认配置下的Fourier场
"""
import numpy as np
import pytest

from hpw.models.family import GaussianParams
from hpw.models.group import HaarBox
from hpw.models.run_config import LambdaGridSpec, RunConfig
from hpw.models.spectral import CalibrationConstants, QuadratureSpec
from hpw.services.function_family import GaussianFunction
from hpw.services.group_fourier import analytic_plancherel_constant, fourier_field, lambda_grid
from hpw.services.groups.group_factory import GroupFactory
from hpw.services.groups.htype import quaternion_spec

# 单元测试用的缩小配置
SMALL_CUTOFF = 8
SMALL_BOX = HaarBox(radius_v=12.0, radius_t=7.0, nodes_v=48, nodes_t=32)
SMALL_GRID = LambdaGridSpec(lambda_min=0.1, lambda_max=6.0, nodes=16, origin_panel_nodes=2)


@pytest.fixture(scope="session")
def heisenberg():
    return GroupFactory.heisenberg(1)


@pytest.fixture(scope="session")
def quaternion_group():
    return GroupFactory.create(quaternion_spec(3))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def small_quad():
    return QuadratureSpec(box=SMALL_BOX, hermite_nodes=2 * SMALL_CUTOFF + 24)


@pytest.fixture(scope="session")
def small_grid(heisenberg):
    return lambda_grid(heisenberg, SMALL_GRID)


@pytest.fixture(scope="session")
def gaussian(heisenberg):
    return GaussianFunction(heisenberg, GaussianParams(a=0.1, b=1.0))


@pytest.fixture(scope="session")
def default_config():
    return RunConfig()


@pytest.fixture(scope="session")
def default_setup(heisenberg, default_config):
    """默认配置（H¹，N=20，64节点Λ网格）下的网格与求积"""
    return lambda_grid(heisenberg, default_config.lambda_grid), default_config.quadrature()


@pytest.fixture(scope="session")
def default_field(gaussian, heisenberg, default_config, default_setup):
    grid, quad = default_setup
    return fourier_field(gaussian, heisenberg, grid, default_config.cutoff, quad)


@pytest.fixture(scope="session")
def analytic_consts(heisenberg):
    c = analytic_plancherel_constant(heisenberg)
    return CalibrationConstants(plancherel_c=c, inversion_kappa=c)


def small_config_overrides(tmp_path) -> list:
    """CLI测试用的缩小配置覆盖项"""
    return [
        f"cutoff={SMALL_CUTOFF}",
        f"haar={SMALL_BOX.model_dump_json()}",
        f"lambda_grid={SMALL_GRID.model_dump_json()}",
        f"output_dir={tmp_path}",
    ]

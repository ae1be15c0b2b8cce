"""
验证上下文的Fourier场缓存测试
"""
import numpy as np

from hpw.models.family import GaussianParams
from hpw.models.run_config import RunConfig
from hpw.services.function_family import GaussianFunction
from hpw.services.verification import _Context

from hpw.tests.conftest import SMALL_BOX, SMALL_CUTOFF, SMALL_GRID


def _small_context() -> _Context:
    cfg = RunConfig(cutoff=SMALL_CUTOFF, haar=SMALL_BOX, lambda_grid=SMALL_GRID)
    return _Context(cfg, None)


def test_field_cache_is_keyed_by_function_object():
    ctx = _small_context()
    f = GaussianFunction(ctx.group, GaussianParams(a=0.1, b=1.0))
    first = ctx.field(f)
    assert ctx.field(f) is first

    # 参数相同的另一个对象单独计算，结果一致
    twin = GaussianFunction(ctx.group, GaussianParams(a=0.1, b=1.0))
    second = ctx.field(twin)
    assert second is not first
    assert all(np.array_equal(a.entries, b.entries) for a, b in zip(first.ops, second.ops))


def test_cached_fields_outlive_temporary_functions():
    ctx = _small_context()
    fields = [ctx.field(GaussianFunction(ctx.group, GaussianParams(a=a, b=1.0))) for a in (0.1, 0.3)]
    # 缓存持有函数引用，临时对象的id不会被新对象复用
    fresh = GaussianFunction(ctx.group, GaussianParams(a=0.3, b=1.0))
    diagonal = [abs(op.entries[0, 0]) for op in ctx.field(fresh).ops]
    assert np.allclose(diagonal, [abs(op.entries[0, 0]) for op in fields[1].ops], rtol=1e-12, atol=0)
    assert len(ctx._fields) == 3

"""
estimate 命令：用无导数优化在高斯族上估计最优常数
"""
from typing import Any, Dict

from hpw.api.common import CommandContext, calibration_path, load_calibration
from hpw.database.artifacts import write_json_sidecar
from hpw.models.inequality import InequalityConfig, beta_lower_bound
from hpw.models.run_config import RunConfig
from hpw.services.hpw_harness import estimate_constant
from hpw.utils.logger import Logger
from hpw.utils.response import OptimizerDivergedError, ResponseModel

logger = Logger(__name__)


def inequality_for(cfg: RunConfig, homogeneous_dimension: int) -> InequalityConfig:
    spec = cfg.optimizer
    beta = spec.beta if spec.beta is not None else beta_lower_bound(spec.p, homogeneous_dimension) + 1.0
    return InequalityConfig.create(spec.p, spec.gamma, beta, homogeneous_dimension)


def run_estimate(cfg: RunConfig) -> ResponseModel[Dict[str, Any]]:
    """
    执行常数估计，结果写入 estimate.json

    Raises:
        InadmissibleConfigError: 优化器的(p, β, γ)不可容许
        OptimizerDivergedError: 出现非有限求值（轨迹写入 estimate_aborted.json 后再抛出）
    """
    ctx = CommandContext.build(cfg)
    ineq = inequality_for(cfg, ctx.group.Q)
    consts = load_calibration(ctx) if calibration_path(ctx).exists() else None
    logger.info("开始常数估计", {"p": ineq.p, "beta": ineq.beta, "gamma": ineq.gamma, "budget": cfg.optimizer.budget})
    try:
        report = estimate_constant(
            ctx.group, ineq, cfg.optimizer, ctx.grid, cfg.cutoff, ctx.quad,
            consts=consts, seed=cfg.seed, base=cfg.family.members[0],
        )
    except OptimizerDivergedError as e:
        write_json_sidecar(ctx.out_dir / "estimate_aborted.json", {
            "message": e.message,
            "errors": e.errors,
            **ctx.record_metadata(),
        })
        raise
    payload = report.model_dump(mode="json")
    payload.update(ctx.record_metadata())
    path = write_json_sidecar(ctx.out_dir / "estimate.json", payload)
    return ResponseModel.success_response(
        data={
            "min_ratio": report.min_ratio,
            "argmin": report.argmin,
            "evaluations": report.evaluations,
            "output": str(path),
        },
        message="常数估计完成",
        run_id=ctx.run_id,
    )

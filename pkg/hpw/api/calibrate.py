"""
calibrate 命令：在校准族上拟合Plancherel常数与反演常数并写入旁路文件
"""
from typing import Any, Dict

from hpw.api.common import CommandContext, save_calibration
from hpw.config.settings import get_settings
from hpw.models.run_config import RunConfig
from hpw.services.function_family import materialize
from hpw.services.group_fourier import calibrate
from hpw.utils.logger import Logger
from hpw.utils.response import ResponseModel

logger = Logger(__name__)


def run_calibrate(cfg: RunConfig) -> ResponseModel[Dict[str, Any]]:
    """
    执行校准

    Args:
        cfg: 运行配置

    Returns:
        ResponseModel: data含常数、残差与旁路文件路径

    Raises:
        CalibrationError: 残差超过CALIBRATION_MAX_RESIDUAL
        DegenerateFamilyError: 校准族少于3个函数或退化
    """
    ctx = CommandContext.build(cfg)
    settings = get_settings()
    functions = materialize(ctx.group, cfg.family.calibration)
    logger.info("开始校准", {"run_id": ctx.run_id, "functions": len(functions), "lambda_nodes": ctx.grid.size})
    consts = calibrate(
        functions,
        ctx.grid,
        cfg.cutoff,
        ctx.quad,
        max_residual=settings.CALIBRATION_MAX_RESIDUAL,
        threads=ctx.threads,
    )
    path = save_calibration(ctx, consts)
    logger.info("校准旁路文件已写入", {"path": str(path)})
    return ResponseModel.success_response(
        data={
            "plancherel_c": consts.plancherel_c,
            "inversion_kappa": consts.inversion_kappa,
            "residual": consts.residual,
            "analytic_reference": consts.analytic_reference,
            "sidecar": str(path),
            "config_hash": ctx.config_hash,
        },
        message="校准完成",
        run_id=ctx.run_id,
    )

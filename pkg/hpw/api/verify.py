"""
verify 命令：运行验证套件并写出逐项检查报告
"""
from typing import Any, Dict

from hpw.api.common import CommandContext, load_calibration
from hpw.database.artifacts import write_jsonl
from hpw.models.run_config import RunConfig
from hpw.models.verification import SuiteName
from hpw.services.verification import run_suite
from hpw.utils.logger import Logger
from hpw.utils.response import ErrorCode, HPWError, ResponseModel, UsageError

logger = Logger(__name__)


def run_verify(cfg: RunConfig, suite: str) -> ResponseModel[Dict[str, Any]]:
    """
    执行验证套件，报告写入 verify_<suite>.jsonl

    Raises:
        UsageError: 未知套件
        SidecarError: 需要校准常数但旁路文件缺失或不一致
        HPWError: 有检查未通过（check_failed，退出码1）
    """
    valid = [s.value for s in SuiteName]
    if suite not in valid:
        raise UsageError(f"未知验证套件: {suite}", errors=[{"field": "suite", "message": f"可选: {valid}"}])
    ctx = CommandContext.build(cfg)
    consts = load_calibration(ctx) if SuiteName.needs_calibration(suite) else None

    results = run_suite(suite, cfg, consts)
    base = {"config_hash": ctx.config_hash, "run_id": ctx.run_id, "seed": cfg.seed}
    path = write_jsonl(ctx.out_dir / f"verify_{suite}.jsonl", [{**base, **r.model_dump()} for r in results])

    failed = [r for r in results if not r.passed]
    summary = {"suite": suite, "checks": len(results), "failed": len(failed), "report": str(path)}
    logger.info("验证完成", summary)
    if failed:
        raise HPWError(
            f"{len(failed)}/{len(results)}项检查未通过",
            errors=[{"field": r.name, "message": f"value={r.value} threshold={r.threshold} {r.detail}".strip()}
                    for r in failed],
            error_code=ErrorCode.CHECK_FAILED,
        )
    return ResponseModel.success_response(data=summary, message="全部检查通过", run_id=ctx.run_id)

"""
命令层公共工具：运行上下文与校准旁路文件
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict

from pydantic import ValidationError

from hpw.config.run_config import run_config_hash, run_identifier
from hpw.config.settings import get_settings
from hpw.database.artifacts import read_json_sidecar, write_json_sidecar
from hpw.models.run_config import RunConfig
from hpw.models.spectral import CalibrationConstants, LambdaGrid, QuadratureSpec
from hpw.services.group_fourier import lambda_grid
from hpw.services.groups.base_group import BaseGroup
from hpw.services.groups.group_factory import GroupFactory
from hpw.utils.logger import Logger
from hpw.utils.response import SidecarError

logger = Logger(__name__)

CALIBRATION_FILE = "calibration.json"
SIDECAR_REQUIRED_KEYS = ("config_hash", "descriptor_hash", "constants", "cutoff", "lambda_grid")


@dataclass
class CommandContext:
    """一次命令执行所需的群、网格与输出位置"""
    cfg: RunConfig
    group: BaseGroup
    grid: LambdaGrid
    quad: QuadratureSpec
    config_hash: str
    run_id: str
    out_dir: Path
    extra: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def build(cls, cfg: RunConfig) -> "CommandContext":
        group = GroupFactory.create(cfg.group)
        return cls(
            cfg=cfg,
            group=group,
            grid=lambda_grid(group, cfg.lambda_grid),
            quad=cfg.quadrature(),
            config_hash=run_config_hash(cfg),
            run_id=run_identifier(cfg),
            out_dir=Path(cfg.output_dir),
        )

    @property
    def threads(self) -> int:
        return get_settings().thread_count

    def record_metadata(self) -> Dict[str, Any]:
        """每条输出记录附带的求积信息"""
        return {
            "config_hash": self.config_hash,
            "run_id": self.run_id,
            "seed": self.cfg.seed,
            "descriptor_hash": self.group.descriptor_hash(),
            "cutoff": self.cfg.cutoff,
            "hermite_nodes": self.quad.hermite_nodes,
            "lambda_grid": self.cfg.lambda_grid.model_dump(),
            "box": self.quad.box.model_dump(),
        }


def calibration_path(ctx: CommandContext) -> Path:
    return ctx.out_dir / CALIBRATION_FILE


def save_calibration(ctx: CommandContext, consts: CalibrationConstants) -> Path:
    payload = ctx.record_metadata()
    payload["constants"] = consts.model_dump(mode="json")
    return write_json_sidecar(calibration_path(ctx), payload)


def load_calibration(ctx: CommandContext) -> CalibrationConstants:
    """
    读取校准旁路文件并核对群描述与求积设置

    Raises:
        SidecarError: 文件缺失、损坏或与当前配置不一致
    """
    path = calibration_path(ctx)
    data = read_json_sidecar(path, required=SIDECAR_REQUIRED_KEYS)
    expected = ctx.record_metadata()
    mismatched = [key for key in ("descriptor_hash", "cutoff", "lambda_grid") if data[key] != expected[key]]
    if mismatched:
        raise SidecarError(
            f"校准旁路文件与当前配置不一致: {path}",
            errors=[{"field": key, "message": "与当前配置不同，请重新运行 calibrate"} for key in mismatched],
        )
    if data["config_hash"] != ctx.config_hash:
        logger.warning("校准旁路文件来自不同的运行配置", {"sidecar": data["config_hash"], "current": ctx.config_hash})
    try:
        return CalibrationConstants.model_validate(data["constants"])
    except ValidationError as e:
        raise SidecarError(f"校准常数无效: {path}", errors=[{"field": "constants", "message": str(e)}])

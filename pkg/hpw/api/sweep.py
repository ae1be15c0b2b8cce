"""
sweep 命令：在不等式参数网格与函数族上制表HPW比值与谱尾部估计
"""
import math
from collections import defaultdict
from typing import Any, Dict, List, Optional, Tuple

from hpw.api.common import CommandContext, calibration_path, load_calibration
from hpw.config.run_config import inequality_grid
from hpw.database.artifacts import (
    atomic_write_text,
    field_to_json,
    save_field,
    write_csv,
    write_json_sidecar,
    write_jsonl,
)
from hpw.models.inequality import InequalityConfig
from hpw.models.run_config import RunConfig
from hpw.models.spectral import CalibrationConstants, FourierField, LambdaGrid, QuadratureSpec
from hpw.services.function_family import GaussianFunction, materialize_members
from hpw.services.group_fourier import fourier_field
from hpw.services.hpw_harness import hpw_report, tail_bound_check
from hpw.utils.logger import Logger
from hpw.utils.response import ResponseModel, UsageError

logger = Logger(__name__)

SWEEP_COLUMNS = [
    "p", "beta", "gamma", "member", "dilation", "ratio", "ratio_drift", "norm_p", "weighted_norm",
    "fourier_value", "weight_term", "fourier_term", "lhs", "argmax_lambda",
    "cutoff", "hermite_nodes", "lambda_nodes", "lambda_scale", "plancherel_c", "config_hash", "run_id",
]
TAIL_COLUMNS = [
    "p", "beta", "member", "r", "mass_below", "mass_above", "bound_below", "bound_above",
    "ratio_below", "ratio_above", "fitted_below", "fitted_above", "total_mass", "cutoff", "lambda_nodes",
    "config_hash", "run_id",
]
PLOT_AXES = ("p", "beta", "gamma")
# 复矩阵元素总数不超过此值的Fourier场额外写出JSON副本
FIELD_JSON_MAX_ENTRIES = 200_000


class _Member:
    """族成员在匹配网格上的求值环境：f∘δ_{1/r} 用 Λ网格缩放r^{-2} 与 δ_r 盒"""

    def __init__(self, index: int, r: float, f: GaussianFunction, ctx: CommandContext):
        self.index = index
        self.r = r
        self.f = f
        self.grid: LambdaGrid = ctx.grid.scaled(r ** -2) if r != 1.0 else ctx.grid
        self.quad: QuadratureSpec = ctx.quad.dilated(r) if r != 1.0 else ctx.quad
        self._field: Optional[FourierField] = None
        self._ctx = ctx

    @property
    def field(self) -> FourierField:
        if self._field is None:
            self._field = fourier_field(self.f, self._ctx.group, self.grid, self._ctx.cfg.cutoff, self.quad,
                                        threads=self._ctx.threads)
        return self._field


def _sweep_consts(ctx: CommandContext) -> Optional[CalibrationConstants]:
    if calibration_path(ctx).exists():
        return load_calibration(ctx)
    logger.warning("未找到校准旁路文件，使用解析Plancherel常数", {"path": str(calibration_path(ctx))})
    return None


def _report_row(ctx: CommandContext, cfg: InequalityConfig, member: _Member,
                consts: Optional[CalibrationConstants]) -> Dict[str, Any]:
    report = hpw_report(member.f, cfg, member.grid, ctx.cfg.cutoff, member.quad, consts, member.field)
    return {
        "p": cfg.p,
        "beta": cfg.beta,
        "gamma": cfg.gamma,
        "member": member.index,
        "dilation": member.r,
        "ratio": report.ratio,
        "norm_p": report.norm_p,
        "weighted_norm": report.weighted_norm,
        "fourier_value": report.fourier_value,
        "weight_term": report.weight_term,
        "fourier_term": report.fourier_term,
        "lhs": report.lhs,
        "argmax_lambda": report.argmax_lambda,
        "cutoff": ctx.cfg.cutoff,
        "hermite_nodes": member.quad.hermite_nodes,
        "lambda_nodes": member.grid.size,
        "lambda_scale": member.r ** -2,
        "plancherel_c": report.metadata["plancherel_c"],
        "config_hash": ctx.config_hash,
        "run_id": ctx.run_id,
    }


def _add_drift(rows: List[Dict[str, Any]]) -> None:
    # 同一(p, β, γ, 成员)下相对最小伸缩的比值漂移
    reference: Dict[Tuple, float] = {}
    for row in rows:
        key = (row["p"], row["beta"], row["gamma"], row["member"])
        reference.setdefault(key, row["ratio"])
        row["ratio_drift"] = row["ratio"] / reference[key] - 1.0


def plot_table(rows: List[Dict[str, Any]], axis: str) -> List[Dict[str, Any]]:
    """按单一参数汇总比值的最小值、最大值与均值"""
    groups: Dict[float, List[float]] = defaultdict(list)
    for row in rows:
        groups[row[axis]].append(row["ratio"])
    return [
        {axis: key, "ratio_min": min(v), "ratio_max": max(v), "ratio_mean": math.fsum(v) / len(v), "rows": len(v)}
        for key, v in sorted(groups.items())
    ]


def _tail_rows(ctx: CommandContext, configs: List[InequalityConfig], members: List[_Member],
               consts: Optional[CalibrationConstants]) -> List[Dict[str, Any]]:
    seen = set()
    rows = []
    for cfg in configs:
        if (cfg.p, cfg.beta) in seen:
            continue
        seen.add((cfg.p, cfg.beta))
        for member in members:
            if member.r != 1.0:
                continue
            report = tail_bound_check(member.f, cfg, ctx.cfg.inequality.tail_r, member.grid, ctx.cfg.cutoff,
                                      member.quad, consts, member.field)
            for tail in report.rows:
                rows.append({
                    "p": cfg.p,
                    "beta": cfg.beta,
                    "member": member.index,
                    **tail.model_dump(),
                    "fitted_below": report.fitted_below,
                    "fitted_above": report.fitted_above,
                    "total_mass": report.total_mass,
                    "cutoff": ctx.cfg.cutoff,
                    "lambda_nodes": member.grid.size,
                    "config_hash": ctx.config_hash,
                    "run_id": ctx.run_id,
                })
    return rows


def _persist_fields(ctx: CommandContext, members: List[_Member]) -> List[str]:
    """写出各成员未伸缩时的Fourier场容器 fields/member{i}.hpwf，小规模时附JSON副本"""
    written = []
    for member in members:
        if member.r != 1.0:
            continue
        field = member.field
        stem = ctx.out_dir / "fields" / f"member{member.index}"
        written.append(str(save_field(stem.with_suffix(".hpwf"), field)))
        if field.ops and field.size * field.ops[0].dimension ** 2 <= FIELD_JSON_MAX_ENTRIES:
            written.append(str(atomic_write_text(stem.with_suffix(".json"), field_to_json(field))))
    return written


def run_sweep(cfg: RunConfig) -> ResponseModel[Dict[str, Any]]:
    """
    执行参数扫描

    输出 sweep.csv / sweep.jsonl（按(p, β, γ, 成员, 伸缩)排序）、
    sweep_plot_{p,beta,gamma}.csv、tails.csv、sweep_baseline.json 与 fields/ 下的Fourier场容器

    Raises:
        UsageError: 网格中没有任何可容许组合
    """
    ctx = CommandContext.build(cfg)
    configs, skipped = inequality_grid(cfg, ctx.group.Q)
    for item in skipped:
        logger.warning("跳过不可容许的参数组合", item)
    if not configs:
        raise UsageError("不等式参数网格中没有可容许的组合", errors=[
            {"field": "inequality", "message": item["reason"]} for item in skipped
        ])
    consts = _sweep_consts(ctx)
    members = [_Member(i, r, f, ctx) for i, r, f in materialize_members(ctx.group, cfg.family)]
    logger.info("开始扫描", {"configs": len(configs), "skipped": len(skipped), "members": len(members)})

    rows = [_report_row(ctx, c, m, consts) for c in configs for m in members]
    rows.sort(key=lambda row: (row["p"], row["beta"], row["gamma"], row["member"], row["dilation"]))
    _add_drift(rows)

    out = ctx.out_dir
    write_csv(out / "sweep.csv", rows, SWEEP_COLUMNS)
    write_jsonl(out / "sweep.jsonl", rows)
    for axis in PLOT_AXES:
        write_csv(out / f"sweep_plot_{axis}.csv", plot_table(rows, axis))
    tails = _tail_rows(ctx, configs, members, consts)
    write_csv(out / "tails.csv", tails, TAIL_COLUMNS)
    fields = _persist_fields(ctx, members)

    best = min(rows, key=lambda row: row["ratio"])
    baseline = {
        "min_ratio": best["ratio"],
        "argmin": {key: best[key] for key in ("p", "beta", "gamma", "member", "dilation")},
        "max_dilation_drift": max(abs(row["ratio_drift"]) for row in rows),
        "skipped": skipped,
        **ctx.record_metadata(),
    }
    write_json_sidecar(out / "sweep_baseline.json", baseline)
    logger.info("扫描完成", {"rows": len(rows), "min_ratio": best["ratio"]})
    return ResponseModel.success_response(
        data={"rows": len(rows), "skipped": len(skipped), "min_ratio": best["ratio"], "fields": len(fields),
              "output_dir": str(out)},
        message="扫描完成",
        run_id=ctx.run_id,
    )

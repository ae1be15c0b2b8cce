"""
主程序入口
hpw calibrate|verify|sweep|estimate --config <path> [--set key=value ...] [--out <dir>] [--seed <u64>]
"""
import argparse
import sys
from typing import List, Optional

from hpw.api import get_commands
from hpw.config.run_config import load_run_config, run_identifier
from hpw.config.settings import get_settings
from hpw.models.verification import SuiteName
from hpw.utils.logger import Logger, setup_logging
from hpw.utils.response import ErrorCode, ErrorResponseModel, ExitCode, HPWError, dumps_record

logger = Logger(__name__)


class _ArgumentParser(argparse.ArgumentParser):
    """参数错误时抛出UsageError而不是直接退出，保证输出统一的错误记录"""

    def error(self, message: str):
        raise HPWError(message, errors=[{"field": "argv", "message": message}], error_code=ErrorCode.USAGE_ERROR)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="hpw", description="Métivier群上L^p不确定性不等式的数值检验")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in get_commands():
        sub = subparsers.add_parser(name)
        sub.add_argument("--config", default=None, help="JSON运行配置文件")
        sub.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                         help="覆盖配置项，可重复；值按JSON解析")
        sub.add_argument("--out", default=None, help="输出目录")
        sub.add_argument("--seed", type=int, default=None, help="随机种子（0 ≤ seed < 2^64）")
        if name == "verify":
            sub.add_argument("--suite", default=SuiteName.ALL.value,
                             choices=[s.value for s in SuiteName], help="验证套件")
    return parser


def _emit(record) -> None:
    sys.stdout.write(dumps_record(record) + "\n")
    sys.stdout.flush()


def main(argv: Optional[List[str]] = None) -> int:
    """
    解析命令行、执行命令并输出一行JSON结果

    Returns:
        int: 退出码（0成功，1检查失败，2用法错误，3环境/旁路文件错误）
    """
    settings = get_settings()
    setup_logging(**settings.logging_settings)
    run_id = None
    try:
        args = build_parser().parse_args(argv)
        cfg = load_run_config(args.config, args.overrides, output_dir=args.out, seed=args.seed)
        run_id = run_identifier(cfg)
        handler = get_commands()[args.command]
        logger.info("执行命令", {"command": args.command, "run_id": run_id, "env": settings.HPW_ENV})
        if args.command == "verify":
            response = handler(cfg, args.suite)
        else:
            response = handler(cfg)
        _emit(response)
        return int(ExitCode.SUCCESS)
    except HPWError as e:
        logger.error("命令失败", {"error_code": e.error_code.value, "message": e.message})
        _emit(e.to_response(run_id=run_id))
        return int(e.exit_code)
    except OSError as e:
        logger.error("文件系统错误", {"message": str(e)})
        _emit(ErrorResponseModel.create(str(e), ErrorCode.SIDECAR_ERROR, run_id=run_id))
        return int(ExitCode.ENVIRONMENT_ERROR)


def cli() -> None:
    sys.exit(main())


if __name__ == "__main__":
    cli()

"""
命令入口模块
"""
from typing import Callable, Dict

from hpw.api.calibrate import run_calibrate
from hpw.api.estimate import run_estimate
from hpw.api.sweep import run_sweep
from hpw.api.verify import run_verify


def get_commands() -> Dict[str, Callable]:
    """
    获取命令集合

    Returns:
        命令名到处理函数的映射（verify额外接收套件名）
    """
    return {
        "calibrate": run_calibrate,
        "verify": run_verify,
        "sweep": run_sweep,
        "estimate": run_estimate,
    }

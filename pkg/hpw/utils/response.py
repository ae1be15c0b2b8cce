"""
命令结果与错误处理工具

提供统一的命令结果格式、错误代码、退出码以及异常层级
"""
from typing import Any, Dict, Optional, Generic, TypeVar, List, Union, Literal
from pydantic import BaseModel, Field, ConfigDict
from enum import Enum, IntEnum
import json
import logging
import math
from datetime import datetime, date

import numpy as np

# 配置日志
logger = logging.getLogger(__name__)

# 定义泛型类型变量
DataT = TypeVar('DataT')


class CustomJSONEncoder(json.JSONEncoder):
    """自定义JSON编码器，支持numpy、复数、datetime以及pydantic模型的序列化"""
    def default(self, obj):
        if isinstance(obj, (datetime, date)):
            return obj.isoformat()
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.bool_):
            return bool(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, complex):
            return {"re": obj.real, "im": obj.imag}
        if isinstance(obj, Enum):
            return obj.value
        if hasattr(obj, "model_dump") and callable(getattr(obj, "model_dump")):
            return obj.model_dump(mode="json")
        return super().default(obj)


def dumps_record(content: Any) -> str:
    """
    以确定性方式序列化一条记录（键排序、紧凑分隔符）

    Args:
        content: 待序列化内容

    Returns:
        str: 单行JSON文本
    """
    return json.dumps(
        _sanitize(content),
        ensure_ascii=False,
        allow_nan=False,
        sort_keys=True,
        separators=(",", ":"),
        cls=CustomJSONEncoder,
    )


def _sanitize(value: Any) -> Any:
    # 非有限浮点数写成字符串，保证输出始终是合法JSON
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(value, dict):
        return {str(k): _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    if isinstance(value, BaseModel):
        return _sanitize(value.model_dump(mode="python"))
    if isinstance(value, np.ndarray):
        return _sanitize(value.tolist())
    return value


class ErrorCode(str, Enum):
    """错误代码枚举"""
    # 输入错误
    VALIDATION_ERROR = "validation_error"       # 数据验证错误
    DIMENSION_MISMATCH = "dimension_mismatch"   # 维度不一致
    NON_FINITE = "non_finite"                   # 采样值非有限
    INADMISSIBLE = "inadmissible"               # 不满足可容许条件
    USAGE_ERROR = "usage_error"                 # 命令行用法错误
    NOT_SUPPORTED = "not_supported"             # 尚不支持的配置

    # 数值/业务错误
    EMPTY_FIELD = "empty_field"                 # 空的Fourier场
    DEGENERATE_FAMILY = "degenerate_family"     # 退化的测试函数族
    CALIBRATION_FAILED = "calibration_failed"   # 校准残差超限
    OPTIMIZER_DIVERGED = "optimizer_diverged"   # 优化器发散
    CHECK_FAILED = "check_failed"               # 验证检查未通过

    # 环境错误
    SIDECAR_ERROR = "sidecar_error"             # 旁路文件缺失或损坏

    @classmethod
    def get_description(cls, value: str) -> str:
        """获取枚举值的中文描述"""
        descriptions = {
            cls.VALIDATION_ERROR.value: "数据验证错误",
            cls.DIMENSION_MISMATCH.value: "维度不一致",
            cls.NON_FINITE.value: "采样值非有限",
            cls.INADMISSIBLE.value: "参数不可容许",
            cls.USAGE_ERROR.value: "用法错误",
            cls.NOT_SUPPORTED.value: "不支持的配置",
            cls.EMPTY_FIELD.value: "空的Fourier场",
            cls.DEGENERATE_FAMILY.value: "退化的函数族",
            cls.CALIBRATION_FAILED.value: "校准失败",
            cls.OPTIMIZER_DIVERGED.value: "优化器发散",
            cls.CHECK_FAILED.value: "检查未通过",
            cls.SIDECAR_ERROR.value: "旁路文件错误",
        }
        return descriptions.get(value, value)


class ErrorSeverity(str, Enum):
    """错误严重性级别"""
    INFO = "info"           # 信息级别
    WARNING = "warning"     # 警告级别
    ERROR = "error"         # 错误级别
    CRITICAL = "critical"   # 严重级别


class ExitCode(IntEnum):
    """进程退出码"""
    SUCCESS = 0
    CHECK_FAILURE = 1
    USAGE_ERROR = 2
    ENVIRONMENT_ERROR = 3


_EXIT_CODES: Dict[str, ExitCode] = {
    ErrorCode.VALIDATION_ERROR.value: ExitCode.USAGE_ERROR,
    ErrorCode.DIMENSION_MISMATCH.value: ExitCode.USAGE_ERROR,
    ErrorCode.INADMISSIBLE.value: ExitCode.USAGE_ERROR,
    ErrorCode.USAGE_ERROR.value: ExitCode.USAGE_ERROR,
    ErrorCode.NOT_SUPPORTED.value: ExitCode.USAGE_ERROR,
    ErrorCode.NON_FINITE.value: ExitCode.CHECK_FAILURE,
    ErrorCode.EMPTY_FIELD.value: ExitCode.CHECK_FAILURE,
    ErrorCode.DEGENERATE_FAMILY.value: ExitCode.CHECK_FAILURE,
    ErrorCode.CALIBRATION_FAILED.value: ExitCode.CHECK_FAILURE,
    ErrorCode.OPTIMIZER_DIVERGED.value: ExitCode.CHECK_FAILURE,
    ErrorCode.CHECK_FAILED.value: ExitCode.CHECK_FAILURE,
    ErrorCode.SIDECAR_ERROR.value: ExitCode.ENVIRONMENT_ERROR,
}


def exit_code_for(error_code: Union[ErrorCode, str]) -> ExitCode:
    """
    根据错误代码获取进程退出码

    Args:
        error_code: 错误代码

    Returns:
        ExitCode: 对应的退出码，未知代码视为检查失败
    """
    key = error_code.value if isinstance(error_code, ErrorCode) else str(error_code)
    return _EXIT_CODES.get(key, ExitCode.CHECK_FAILURE)


class BaseRecordModel(BaseModel):
    """
    基础记录模型

    提供通用配置的基类
    """
    model_config = ConfigDict(
        populate_by_name=True,
        str_strip_whitespace=True,
        validate_default=True,
    )


class ErrorDetail(BaseRecordModel):
    """错误详情模型"""
    field: Optional[str] = Field(None, description="错误字段", examples=["inequality.beta"])
    message: str = Field(..., description="错误消息", examples=["β不满足可容许条件"])
    code: Optional[str] = Field(None, description="错误代码", examples=["inadmissible"])
    severity: ErrorSeverity = Field(ErrorSeverity.ERROR, description="错误严重性")


class ResponseModel(BaseRecordModel, Generic[DataT]):
    """标准命令结果模型"""
    success: bool = Field(..., description="操作是否成功", examples=[True])
    message: str = Field(..., description="结果消息", examples=["校准完成"])
    data: Optional[DataT] = Field(None, description="结果数据")
    run_id: Optional[str] = Field(None, description="运行ID，由配置哈希与随机种子确定")

    @classmethod
    def success_response(
        cls,
        data: Optional[DataT] = None,
        message: str = "操作成功",
        run_id: Optional[str] = None
    ) -> 'ResponseModel[DataT]':
        """
        创建成功结果实例

        Args:
            data: 结果数据
            message: 结果消息
            run_id: 运行ID

        Returns:
            ResponseModel: 成功结果实例
        """
        return cls(success=True, message=message, data=data, run_id=run_id)


class ErrorResponseModel(BaseRecordModel):
    """错误结果模型"""
    success: Literal[False] = Field(False, description="操作是否成功")
    message: str = Field(..., description="错误消息", examples=["校准失败"])
    errors: Optional[List[ErrorDetail]] = Field(None, description="详细错误列表")
    error_code: Optional[str] = Field(None, description="错误代码", examples=["calibration_failed"])
    exit_code: int = Field(int(ExitCode.CHECK_FAILURE), description="进程退出码")
    run_id: Optional[str] = Field(None, description="运行ID")

    @classmethod
    def create(
        cls,
        message: str,
        error_code: Union[ErrorCode, str] = ErrorCode.VALIDATION_ERROR,
        errors: Optional[List[Union[ErrorDetail, Dict[str, Any]]]] = None,
        run_id: Optional[str] = None
    ) -> 'ErrorResponseModel':
        """
        创建错误结果实例

        Args:
            message: 错误消息
            error_code: 错误代码
            errors: 详细错误列表
            run_id: 运行ID

        Returns:
            ErrorResponseModel: 错误结果实例
        """
        error_details = []
        for error in errors or []:
            if isinstance(error, ErrorDetail):
                error_details.append(error)
            elif isinstance(error, dict):
                error_details.append(
                    ErrorDetail(
                        field=error.get("field"),
                        message=error.get("message") or error.get("msg", "未知错误"),
                        code=error.get("code"),
                        severity=error.get("severity", ErrorSeverity.ERROR),
                    )
                )
        code = error_code.value if isinstance(error_code, ErrorCode) else str(error_code)
        return cls(
            success=False,
            message=message,
            errors=error_details or None,
            error_code=code,
            exit_code=int(exit_code_for(code)),
            run_id=run_id,
        )


class HPWError(Exception):
    """所有领域错误的基类，携带错误代码与详细错误列表"""

    error_code: ErrorCode = ErrorCode.VALIDATION_ERROR

    def __init__(
        self,
        message: str,
        errors: Optional[List[Union[ErrorDetail, Dict[str, Any]]]] = None,
        error_code: Optional[ErrorCode] = None
    ):
        super().__init__(message)
        self.message = message
        self.errors = errors or []
        if error_code is not None:
            self.error_code = error_code

    @property
    def exit_code(self) -> ExitCode:
        """对应的进程退出码"""
        return exit_code_for(self.error_code)

    def to_response(self, run_id: Optional[str] = None) -> ErrorResponseModel:
        """转换为错误结果模型"""
        return ErrorResponseModel.create(
            message=self.message,
            error_code=self.error_code,
            errors=self.errors,
            run_id=run_id,
        )


class DimensionMismatchError(HPWError, ValueError):
    error_code = ErrorCode.DIMENSION_MISMATCH


class NonFiniteSampleError(HPWError, ValueError):
    error_code = ErrorCode.NON_FINITE


class InadmissibleConfigError(HPWError, ValueError):
    error_code = ErrorCode.INADMISSIBLE


class NotSupportedError(HPWError, ValueError):
    error_code = ErrorCode.NOT_SUPPORTED


class UsageError(HPWError, ValueError):
    error_code = ErrorCode.USAGE_ERROR


class EmptyFieldError(HPWError, ValueError):
    error_code = ErrorCode.EMPTY_FIELD


class DegenerateFamilyError(HPWError, ValueError):
    error_code = ErrorCode.DEGENERATE_FAMILY


class CalibrationError(HPWError):
    error_code = ErrorCode.CALIBRATION_FAILED


class OptimizerDivergedError(HPWError):
    error_code = ErrorCode.OPTIMIZER_DIVERGED


class SidecarError(HPWError):
    error_code = ErrorCode.SIDECAR_ERROR

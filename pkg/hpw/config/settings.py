"""
运行环境配置模块
使用Pydantic的BaseSettings管理环境变量
"""
import os
from typing import Optional, Dict, Any
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from functools import lru_cache


class Settings(BaseSettings):
    """运行环境配置设置类"""

    # 环境配置
    HPW_ENV: str = Field("development", description="运行环境")

    # 并行配置
    HPW_THREADS: int = Field(0, ge=0, description="线程池上限，0表示使用CPU核数")

    # 输出配置
    HPW_OUTPUT_DIR: str = Field("results", description="默认输出目录")
    HPW_NODE_CACHE_DIR: Optional[str] = Field(None, description="Gauss-Hermite节点表缓存目录")

    # 校准配置
    CALIBRATION_MAX_RESIDUAL: float = Field(0.05, gt=0, description="校准允许的最大相对残差")

    # 日志配置
    LOG_LEVEL: str = Field("INFO", description="日志级别")
    LOG_FILE: Optional[str] = Field(None, description="日志文件路径")

    # Pydantic v2 配置
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore"
    )

    @field_validator("HPW_ENV")
    def validate_env(cls, v: str) -> str:
        """验证运行环境"""
        allowed_values = ["development", "testing", "production"]
        if v.lower() not in allowed_values:
            raise ValueError(f"HPW_ENV必须是以下值之一: {', '.join(allowed_values)}")
        return v.lower()

    @field_validator("LOG_LEVEL")
    def validate_log_level(cls, v: str) -> str:
        """验证日志级别"""
        allowed_values = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in allowed_values:
            raise ValueError(f"LOG_LEVEL必须是以下值之一: {', '.join(allowed_values)}")
        return v.upper()

    @field_validator("HPW_THREADS", mode="before")
    def validate_threads(cls, v: Any) -> int:
        """验证线程数，允许带注释的环境变量值"""
        if isinstance(v, str):
            v = v.split('#')[0].strip() or "0"
            return int(v)
        return v

    @property
    def thread_count(self) -> int:
        """实际使用的线程数"""
        if self.HPW_THREADS > 0:
            return self.HPW_THREADS
        return os.cpu_count() or 1

    @property
    def logging_settings(self) -> Dict[str, Any]:
        """日志设置"""
        return {
            "level": self.LOG_LEVEL,
            "log_file": self.LOG_FILE
        }


@lru_cache()
def get_settings() -> Settings:
    """
    获取运行环境配置单例
    使用lru_cache装饰器确保只创建一个实例
    """
    return Settings()

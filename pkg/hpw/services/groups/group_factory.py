"""
群描述工厂类，用于从JSON文档创建和管理群描述
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Type, Union

from pydantic import ValidationError

from hpw.models.group import GroupSpec
from hpw.services.groups.base_group import BaseGroup
from hpw.services.groups.heisenberg import HeisenbergGroup
from hpw.services.groups.htype import HTypeGroup
from hpw.utils.response import NotSupportedError, UsageError

logger = logging.getLogger(__name__)


class GroupFactory:
    """群描述工厂类"""

    # 群类映射
    _group_classes: Dict[str, Type[BaseGroup]] = {
        "heisenberg": HeisenbergGroup,
        "htype": HTypeGroup,
    }

    @classmethod
    def create(cls, spec: Union[GroupSpec, Dict[str, Any]]) -> BaseGroup:
        """
        根据描述创建群实例

        Args:
            spec: GroupSpec或等价的字典

        Returns:
            群实例
        """
        if not isinstance(spec, GroupSpec):
            try:
                spec = GroupSpec.model_validate(spec)
            except ValidationError as e:
                raise UsageError(f"群描述无效: {e.errors()[0]['msg']}")
        kind = str(spec.kind).lower()
        if kind not in cls._group_classes:
            raise NotSupportedError(f"不支持的群类型: {kind}")
        group = cls._group_classes[kind](spec)
        logger.debug(f"创建群实例: {group!r}")
        return group

    @classmethod
    def from_json(cls, source: Union[str, Path]) -> BaseGroup:
        """
        从JSON文档（文件路径或JSON文本）创建群实例

        Args:
            source: 文件路径或JSON文本

        Returns:
            群实例
        """
        text = str(source)
        path = Path(text)
        if not text.lstrip().startswith("{"):
            if not path.exists():
                raise UsageError(f"群描述文件不存在: {path}")
            text = path.read_text(encoding="utf-8")
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as e:
            raise UsageError(f"群描述JSON解析失败: {e}")
        return cls.create(payload)

    @classmethod
    def heisenberg(cls, n: int = 1) -> BaseGroup:
        return cls.create(GroupSpec(kind="heisenberg", n=n))

"""
群描述实现包
"""
from hpw.services.groups.base_group import BaseGroup
from hpw.services.groups.group_factory import GroupFactory

__all__ = ["BaseGroup", "GroupFactory"]

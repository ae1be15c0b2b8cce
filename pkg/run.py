#!/usr/bin/env python3
"""
hpw 命令行启动脚本
"""
import sys
from pathlib import Path

from dotenv import load_dotenv

# 加载环境变量 (优先从当前目录加载)
load_dotenv()
if Path("hpw/.env").exists():
    load_dotenv("hpw/.env")

from hpw.main import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())

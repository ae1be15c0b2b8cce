"""
配置包初始化
"""

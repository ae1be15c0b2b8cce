"""
数据模型包初始化
"""

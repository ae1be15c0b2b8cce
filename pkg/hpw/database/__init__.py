"""
数据持久化包初始化
"""

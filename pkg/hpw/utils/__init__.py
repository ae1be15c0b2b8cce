"""
工具函数包初始化
"""

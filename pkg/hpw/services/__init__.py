"""
服务层包初始化
"""

"""
hpw: Métivier群上L^p不确定性不等式的数值检验
"""
__version__ = "1.0.0"

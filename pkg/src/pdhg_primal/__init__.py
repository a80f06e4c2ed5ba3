"""
pdhg-primal - primal-only PDHG for min g over argmin 1/2 ||Ax - b||^2
"""

__version__ = "1.0.0"

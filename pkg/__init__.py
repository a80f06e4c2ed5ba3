"""
pdhg-primal Python Package
Primal-only PDHG, its convergence bounds and a consensus simulator
"""

__version__ = "1.0.0"

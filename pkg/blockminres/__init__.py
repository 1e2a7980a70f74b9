"""
blockminres - preconditioned MINRES for saddle-point systems
with progressive monitoring of the residual subvector norms.
"""

__version__ = "0.1.0"
__description__ = "Preconditioned MINRES with per-block residual monitoring"

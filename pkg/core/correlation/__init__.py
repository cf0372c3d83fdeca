"""
Correlation kernels and SPD linear algebra
"""

from .kernels import KernelKind, KernelSpec, exponential_corr, matern_corr, build_corr_matrix
from .spd import SpdFactor, spd_factor, spd_solve, spd_logdet, spd_inv_quad

__all__ = [
    'KernelKind', 'KernelSpec', 'exponential_corr', 'matern_corr', 'build_corr_matrix',
    'SpdFactor', 'spd_factor', 'spd_solve', 'spd_logdet', 'spd_inv_quad',
]

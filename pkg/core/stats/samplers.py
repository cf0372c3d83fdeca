"""
Standard random variates on explicit generators

Shape/rate convention throughout: Gamma(shape, rate) has mean shape/rate,
so sigma^-2 ~ Gamma(c2, c3) is the same statement as sigma^2 ~ IG(c2, c3).
"""
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular

from core.correlation.spd import SpdFactor
from core.stats.rng import RngState


def _check_positive(**params):
    for name, value in params.items():
        if not (np.isfinite(value) and value > 0):
            raise ValueError(f"{name} must be positive and finite, got {value}")


def sample_normal(rng: RngState, size=None, mean=0.0, sd=1.0):
    """Independent normal draws"""
    return rng.normal(mean, sd, size=size)


def sample_mvn(mean: np.ndarray, factor: SpdFactor, rng: RngState,
               precision: bool = True, z: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Exact multivariate normal draw

    Args:
        mean: mean vector
        factor: Cholesky factor of the precision (precision=True) or of the
            covariance (precision=False)
        z: standard normal vector to transform; drawn from rng when None

    With precision Q = L L', x = mean + L'^{-1} z has covariance Q^{-1}.
    """
    if z is None:
        z = rng.standard_normal(factor.n)
    if precision:
        x = solve_triangular(factor.lower.T, z, lower=False, check_finite=False)
    else:
        x = factor.lower @ z
    return np.asarray(mean, dtype=float) + x


def sample_gamma(shape: float, rate: float, rng: RngState, size=None):
    """Gamma(shape, rate) draw(s), mean shape/rate"""
    _check_positive(shape=shape, rate=rate)
    return rng.gamma(shape, 1.0 / rate, size=size)


def sample_inverse_gamma(shape: float, scale: float, rng: RngState, size=None):
    """IG(shape, scale): reciprocal of a Gamma(shape, rate=scale) draw"""
    return 1.0 / sample_gamma(shape, scale, rng, size=size)


def sample_exponential(rate: float, rng: RngState, size=None):
    """Exponential(rate) draw(s), mean 1/rate"""
    _check_positive(rate=rate)
    return rng.exponential(1.0 / rate, size=size)

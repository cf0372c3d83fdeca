"""
Dense symmetric positive-definite linear algebra

Every sampler step needs C^{-1} and |C| for some SPD matrix C; this module
factors once (lower Cholesky, LAPACK dpotrf) and serves solves and the
log-determinant from the factor.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack, solve_triangular

from core.errors import NotPositiveDefiniteError

# relative pivot floor: L_ii^2 must exceed this times the largest diagonal entry
PIVOT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SpdFactor:
    """Lower Cholesky factor L with L L' = M and cached log|M|"""
    lower: np.ndarray
    logdet: float

    @property
    def n(self) -> int:
        return self.lower.shape[0]


def spd_factor(m: np.ndarray) -> SpdFactor:
    """
    Cholesky-factor a symmetric positive-definite matrix

    Raises:
        NotPositiveDefiniteError: with the (0-based) index of the failing pivot
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NotPositiveDefiniteError(0)

    lower, info = lapack.dpotrf(m, lower=1, clean=1, overwrite_a=0)
    if info > 0:
        raise NotPositiveDefiniteError(info - 1)
    if info < 0:
        raise ValueError(f"dpotrf: illegal argument {-info}")

    diag = np.diag(lower)
    floor = PIVOT_TOLERANCE * max(float(np.max(np.diag(m))), 0.0)
    small = diag ** 2 <= floor
    if small.any():
        k = int(np.argmax(small))
        raise NotPositiveDefiniteError(k, float(diag[k] ** 2))

    lower = np.ascontiguousarray(lower)
    lower.setflags(write=False)
    return SpdFactor(lower=lower, logdet=float(2.0 * np.sum(np.log(diag))))


def spd_solve(f: SpdFactor, b: np.ndarray) -> np.ndarray:
    """Solve M x = b given the factor of M (b may be a vector or a matrix)"""
    z = solve_triangular(f.lower, b, lower=True, check_finite=False)
    return solve_triangular(f.lower.T, z, lower=False, check_finite=False)


def spd_logdet(f: SpdFactor) -> float:
    return f.logdet


def spd_inv_quad(f: SpdFactor, b: np.ndarray) -> float:
    """b' M^{-1} b"""
    z = solve_triangular(f.lower, b, lower=True, check_finite=False)
    return float(np.dot(z, z))

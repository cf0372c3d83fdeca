"""
Isotropic correlation kernels

Two families are supported:
- exponential: C(h) = exp(-h / theta)
- Matern:      C(h) = 2^(1-nu) / Gamma(nu) * (h/theta1)^nu * K_nu(h/theta1), nu = theta2

Both return exactly 1 at h = 0. Matern is evaluated in log space with the
exponentially scaled Bessel function so large h underflows cleanly to 0.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Tuple, Union

import numpy as np
from scipy import special

from core.data.distances import DistanceMatrix

ArrayLike = Union[float, np.ndarray]


class KernelKind(str, Enum):
    EXPONENTIAL = "exponential"
    MATERN = "matern"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family and its strictly positive parameters"""
    kind: KernelKind
    theta: Tuple[float, ...]

    def __post_init__(self):
        kind = KernelKind(self.kind)
        theta = tuple(float(t) for t in np.atleast_1d(self.theta))
        expected = 1 if kind is KernelKind.EXPONENTIAL else 2
        if len(theta) != expected:
            raise ValueError(f"{kind.value} kernel takes {expected} parameter(s), got {len(theta)}")
        if not all(np.isfinite(t) and t > 0 for t in theta):
            raise ValueError(f"Kernel parameters must be positive and finite, got {theta}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "theta", theta)

    @classmethod
    def exponential(cls, theta: float) -> "KernelSpec":
        return cls(KernelKind.EXPONENTIAL, (theta,))

    @classmethod
    def matern(cls, theta1: float, theta2: float) -> "KernelSpec":
        return cls(KernelKind.MATERN, (theta1, theta2))

    @property
    def n_params(self) -> int:
        return len(self.theta)

    def with_theta(self, theta) -> "KernelSpec":
        """Same family with new parameters"""
        return KernelSpec(self.kind, tuple(theta))

    def corr(self, h: ArrayLike) -> ArrayLike:
        if self.kind is KernelKind.EXPONENTIAL:
            return exponential_corr(h, self.theta[0])
        return matern_corr(h, self.theta[0], self.theta[1])


def _check_positive(**params):
    for name, value in params.items():
        if not (np.isfinite(value) and value > 0):
            raise ValueError(f"{name} must be positive and finite, got {value}")


def exponential_corr(h: ArrayLike, theta: float) -> ArrayLike:
    """Exponential correlation exp(-h/theta)"""
    _check_positive(theta=theta)
    h = np.asarray(h, dtype=float)
    if np.any(h < 0):
        raise ValueError("Distances must be non-negative")
    out = np.exp(-h / theta)
    return float(out) if out.ndim == 0 else out


def matern_corr(h: ArrayLike, theta1: float, theta2: float) -> ArrayLike:
    """Matern correlation with range theta1 and smoothness theta2"""
    _check_positive(theta1=theta1, theta2=theta2)
    h = np.asarray(h, dtype=float)
    if np.any(h < 0):
        raise ValueError("Distances must be non-negative")

    u = h / theta1
    positive = u > 0
    out = np.ones_like(u)
    if np.any(positive):
        up = u[positive]
        with np.errstate(divide="ignore", under="ignore", over="ignore"):
            log_c = ((1.0 - theta2) * np.log(2.0) - special.gammaln(theta2)
                     + theta2 * np.log(up) + np.log(special.kve(theta2, up)) - up)
        vals = np.exp(log_c)
        # K_nu overflows only for u -> 0, where the correlation tends to 1
        vals[~np.isfinite(log_c)] = 1.0
        out[positive] = np.minimum(vals, 1.0)
    return float(out) if out.ndim == 0 else out


def build_corr_matrix(d: Union[DistanceMatrix, np.ndarray], kernel: KernelSpec) -> np.ndarray:
    """Correlation matrix C_theta with unit diagonal"""
    dist = d.d if isinstance(d, DistanceMatrix) else np.asarray(d, dtype=float)
    c = np.asarray(kernel.corr(dist), dtype=float)
    c = 0.5 * (c + c.T)
    np.fill_diagonal(c, 1.0)
    return c

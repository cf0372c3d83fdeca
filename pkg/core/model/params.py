"""
Parameter, latent-state and hyperparameter containers

Params (eta) = (beta, sigma2, omega2, tau2, theta) uses the ratio
parameterization: the nugget and measurement-error standard deviations are
never free parameters, they derive as sigma*omega and sigma*tau.
"""
from dataclasses import dataclass, replace
from typing import Dict, List, Tuple

import numpy as np

from core.correlation.kernels import KernelKind, KernelSpec


@dataclass(frozen=True)
class Params:
    """
    Model parameters

    sigma2 must be positive. omega2 and tau2 may be 0 for likelihood
    evaluation (tau2 = 0 is the naive model); the sampler keeps omega2 > 0.
    """
    beta: np.ndarray
    sigma2: float
    omega2: float
    tau2: float
    theta: Tuple[float, ...]

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float, copy=True).reshape(-1)
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "theta", tuple(float(t) for t in np.atleast_1d(self.theta)))
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if not (np.isfinite(self.omega2) and self.omega2 >= 0):
            raise ValueError(f"omega2 must be non-negative, got {self.omega2}")
        if not (np.isfinite(self.tau2) and self.tau2 >= 0):
            raise ValueError(f"tau2 must be non-negative, got {self.tau2}")
        if not all(np.isfinite(t) and t > 0 for t in self.theta):
            raise ValueError(f"theta must be positive, got {self.theta}")

    @property
    def sigma(self) -> float:
        return float(np.sqrt(self.sigma2))

    @property
    def tau(self) -> float:
        return float(np.sqrt(self.tau2))

    def kernel(self, kind) -> KernelSpec:
        return KernelSpec(KernelKind(getattr(kind, "kind", kind)), self.theta)

    def with_(self, **changes) -> "Params":
        return replace(self, **changes)

    def as_vector(self) -> np.ndarray:
        """[beta..., sigma2, omega2, tau2, theta...]"""
        return np.concatenate([self.beta, [self.sigma2, self.omega2, self.tau2], self.theta])

    @classmethod
    def from_vector(cls, vec, p: int) -> "Params":
        vec = np.asarray(vec, dtype=float)
        return cls(beta=vec[:p], sigma2=vec[p], omega2=vec[p + 1], tau2=vec[p + 2],
                   theta=tuple(vec[p + 3:]))

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(param_names(len(self.beta), len(self.theta)), self.as_vector().tolist()))


def param_names(p: int, n_theta: int) -> List[str]:
    """Column names matching Params.as_vector"""
    return ([f"beta_{j}" for j in range(p)] + ["sigma2", "omega2", "tau2"]
            + [f"theta_{k + 1}" for k in range(n_theta)])


@dataclass(frozen=True)
class LatentState:
    """Spatial field epsilon (n,) and standardized measurement-error field V (n, p)"""
    epsilon: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        eps = np.array(self.epsilon, dtype=float, copy=True).reshape(-1)
        v = np.array(self.v, dtype=float, copy=True)
        if v.ndim != 2 or v.shape[0] != eps.shape[0]:
            raise ValueError(f"v must have shape ({eps.shape[0]}, p), got {v.shape}")
        if not (np.all(np.isfinite(eps)) and np.all(np.isfinite(v))):
            raise ValueError("Latent state must be finite")
        if np.any(v[:, 0] != 0):
            raise ValueError("Column 0 of v (intercept) must be zero")
        eps.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "v", v)

    @classmethod
    def zeros(cls, n: int, p: int) -> "LatentState":
        return cls(np.zeros(n), np.zeros((n, p)))


@dataclass(frozen=True)
class Hyperparams:
    """
    Prior constants

    beta ~ N_p(0, c1 I); sigma2 ~ IG(c2, c3); omega2 ~ GIG(gamma_gig, c4, c5);
    tau2 ~ GIG(0, c6, c7); theta1 ~ Exp(c8 / med(d)); theta2 ~ Exp(c9).
    Defaults are the simulation-study values.
    """
    c1: float = 10.0
    c2: float = 1.1
    c3: float = 0.11
    c4: float = 0.05
    c5: float = 2.0
    c6: float = 0.09
    c7: float = 2.0
    c8: float = 1.0
    c9: float = 1.0
    gamma_gig: float = 0.001

    def __post_init__(self):
        for name in ("c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8", "c9"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"Hyperparameter {name} must be positive, got {value}")
        if not np.isfinite(self.gamma_gig):
            raise ValueError(f"gamma_gig must be finite, got {self.gamma_gig}")

    def with_(self, **changes) -> "Hyperparams":
        return replace(self, **changes)

    def as_dict(self) -> Dict[str, float]:
        return {k: getattr(self, k) for k in
                ("c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8", "c9", "gamma_gig")}

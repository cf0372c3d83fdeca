"""
Likelihoods of the spatial measurement-error model

Model for the observed response at n sites:

    y = mu beta + sigma eps + sigma omega rho + sigma tau V beta

with eps ~ N(0, C_theta), rho ~ N(0, I), vec(V) ~ N(0, I) on the
error-prone columns. Integrating out eps, rho and V gives the marginal law

    y ~ N_n(mu beta, sigma2 [C_theta + (omega2 + tau2 b'b) I])

where b holds only the error-prone coefficients. Given eps and V the
response is white noise around the working residual d.
"""
from typing import Optional

import numpy as np

from core.correlation.spd import spd_factor, spd_inv_quad
from core.data.dataset import SpatialDataset
from core.model.context import ModelContext
from core.model.params import LatentState, Params

LOG_2PI = float(np.log(2.0 * np.pi))


def masked_beta_sq(params: Params, data: SpatialDataset) -> float:
    """b'b over error-prone coefficients"""
    b = params.beta[data.error_mask]
    return float(np.dot(b, b))


def marginal_covariance(params: Params, ctx: ModelContext, corr: Optional[np.ndarray] = None) -> np.ndarray:
    """sigma2 [C_theta + (omega2 + tau2 b'b) I]"""
    c = ctx.corr(params.theta) if corr is None else corr
    nugget = params.omega2 + params.tau2 * masked_beta_sq(params, ctx.data)
    return params.sigma2 * (c + nugget * np.eye(ctx.data.n))


def marginal_loglik(params: Params, data: SpatialDataset, kernel,
                    ctx: Optional[ModelContext] = None) -> float:
    """
    Log-density of y with eps, rho and V integrated out

    Raises:
        NotPositiveDefiniteError: degenerate covariance
    """
    ctx = ctx if ctx is not None and ctx.data is data else ModelContext.build(data, kernel)
    cov = marginal_covariance(params, ctx)
    factor = spd_factor(cov)
    resid = data.y - data.mu @ params.beta
    return -0.5 * (data.n * LOG_2PI + factor.logdet + spd_inv_quad(factor, resid))


def working_residual(params: Params, latent: LatentState, data: SpatialDataset) -> np.ndarray:
    """d = y - mu beta - sigma eps - sigma tau V beta"""
    sigma = params.sigma
    return (data.y - data.mu @ params.beta - sigma * latent.epsilon
            - sigma * params.tau * (latent.v @ params.beta))


def conditional_loglik(params: Params, latent: LatentState, data: SpatialDataset) -> float:
    """Sum of log N(d_i; 0, sigma2 omega2): the white-noise likelihood given eps and V"""
    if params.omega2 <= 0:
        raise ValueError("conditional likelihood needs omega2 > 0")
    d = working_residual(params, latent, data)
    var = params.sigma2 * params.omega2
    return -0.5 * (data.n * (LOG_2PI + np.log(var)) + float(np.dot(d, d)) / var)


def field_loglik(epsilon: np.ndarray, logdet_c: float, quad: float) -> float:
    """log N(eps; 0, C) from log|C| and eps' C^{-1} eps"""
    return -0.5 * (len(epsilon) * LOG_2PI + logdet_c + quad)

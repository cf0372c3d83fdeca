"""
Log-priors of the model parameters

Components are mutually independent; log_prior is their sum. The tau2
component is skipped for the naive model (tau2 == 0) and the theta2 component
applies only to the Matern kernel.
"""
import math
from typing import Dict

import numpy as np
from scipy import special

from core.model.params import Hyperparams, Params
from core.stats.gig import GigParams, gig_logpdf, sample_gig
from core.stats.rng import RngState
from core.stats.samplers import sample_exponential, sample_inverse_gamma


def log_normal_beta(beta: np.ndarray, c1: float) -> float:
    """N_p(0, c1 I)"""
    p = len(beta)
    return -0.5 * p * math.log(2.0 * math.pi * c1) - 0.5 * float(np.dot(beta, beta)) / c1


def log_inverse_gamma(x: float, shape: float, scale: float) -> float:
    """IG(shape, scale) density at x, equivalently 1/x ~ Gamma(shape, rate=scale)"""
    return (shape * math.log(scale) - special.gammaln(shape)
            - (shape + 1.0) * math.log(x) - scale / x)


def log_exponential(x: float, rate: float) -> float:
    return math.log(rate) - rate * x


def log_prior_components(params: Params, hyper: Hyperparams, med_d: float) -> Dict[str, float]:
    """Per-block log-prior values"""
    comps = {
        "beta": log_normal_beta(params.beta, hyper.c1),
        "sigma2": log_inverse_gamma(params.sigma2, hyper.c2, hyper.c3),
        "omega2": gig_logpdf(params.omega2, GigParams(hyper.gamma_gig, hyper.c4, hyper.c5)),
    }
    if params.tau2 > 0:
        comps["tau2"] = gig_logpdf(params.tau2, GigParams(0.0, hyper.c6, hyper.c7))
    comps["theta_1"] = log_exponential(params.theta[0], hyper.c8 / med_d)
    if len(params.theta) > 1:
        comps["theta_2"] = log_exponential(params.theta[1], hyper.c9)
    return comps


def log_prior(params: Params, hyper: Hyperparams, med_d: float) -> float:
    """pi(beta) pi(sigma2) pi(omega2) pi(tau2) pi(theta) on log scale"""
    return float(sum(log_prior_components(params, hyper, med_d).values()))


def sample_prior(hyper: Hyperparams, p: int, n_theta: int, med_d: float, rng: RngState,
                 naive: bool = False) -> Params:
    """One draw of every parameter from its prior"""
    beta = rng.normal(0.0, math.sqrt(hyper.c1), size=p)
    sigma2 = sample_inverse_gamma(hyper.c2, hyper.c3, rng)
    omega2 = sample_gig(GigParams(hyper.gamma_gig, hyper.c4, hyper.c5), rng)
    tau2 = 0.0 if naive else sample_gig(GigParams(0.0, hyper.c6, hyper.c7), rng)
    theta = [sample_exponential(hyper.c8 / med_d, rng)]
    if n_theta > 1:
        theta.append(sample_exponential(hyper.c9, rng))
    return Params(beta=beta, sigma2=float(sigma2), omega2=omega2, tau2=tau2,
                  theta=tuple(float(t) for t in theta))

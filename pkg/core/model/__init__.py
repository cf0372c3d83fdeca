"""
Model core: parameters, likelihoods and priors
"""

from .params import Params, LatentState, Hyperparams, param_names
from .context import ModelContext, kernel_kind
from .likelihood import (marginal_loglik, conditional_loglik, marginal_covariance,
                         working_residual, masked_beta_sq)
from .priors import log_prior, log_prior_components, sample_prior

__all__ = [
    'Params', 'LatentState', 'Hyperparams', 'param_names',
    'ModelContext', 'kernel_kind',
    'marginal_loglik', 'conditional_loglik', 'marginal_covariance',
    'working_residual', 'masked_beta_sq',
    'log_prior', 'log_prior_components', 'sample_prior',
]

"""
spatial-mem core package

Bayesian spatial linear model with measurement error in the covariates:
datasets, correlation kernels, random variate generation, likelihoods,
the Gibbs / Metropolis-within-Gibbs sampler, prediction, diagnostics and
the simulation-study protocol.
"""

__version__ = "0.3.0"

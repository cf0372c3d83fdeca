"""
Random generation and densities for spatial-mem
"""

from .rng import RngState, make_rng, spawn_rngs, keyed_rngs, derive_seed
from .bessel import bessel_k, log_bessel_k
from .gig import GigParams, gig_logpdf, gig_mean, gig_variance, sample_gig, sample_gig_many
from .samplers import (sample_normal, sample_mvn, sample_gamma, sample_inverse_gamma,
                       sample_exponential)

__all__ = [
    'RngState', 'make_rng', 'spawn_rngs', 'keyed_rngs', 'derive_seed',
    'bessel_k', 'log_bessel_k',
    'GigParams', 'gig_logpdf', 'gig_mean', 'gig_variance', 'sample_gig', 'sample_gig_many',
    'sample_normal', 'sample_mvn', 'sample_gamma', 'sample_inverse_gamma', 'sample_exponential',
]

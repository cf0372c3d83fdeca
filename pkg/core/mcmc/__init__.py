"""
Gibbs / Metropolis-within-Gibbs sampler and chain management
"""

from .blocks import (ChainState, sample_epsilon, sample_v, sample_beta, mh_sigma2,
                     sample_omega2, mh_tau2, mh_theta, recover_v)
from .sampler import (SamplerConfig, Chain, gibbs_sweep, run_chain, run_chains, chain_inits,
                      initial_latent, successive_conditional_sweeps, simulate_response)
from .chain_io import write_chain, read_chain, read_chains

__all__ = [
    'ChainState', 'sample_epsilon', 'sample_v', 'sample_beta', 'mh_sigma2',
    'sample_omega2', 'mh_tau2', 'mh_theta', 'recover_v',
    'SamplerConfig', 'Chain', 'gibbs_sweep', 'run_chain', 'run_chains', 'chain_inits',
    'initial_latent', 'successive_conditional_sweeps', 'simulate_response',
    'write_chain', 'read_chain', 'read_chains',
]

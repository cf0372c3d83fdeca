"""
Deviance information criterion

DIC = 2 mean(D) - D(eta_bar) with D = -2 marginal log-likelihood, eta_bar the
component-wise posterior mean. pD = mean(D) - D(eta_bar). Using the marginal
likelihood keeps the measurement-error and naive fits comparable.
"""
import logging
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from core.errors import NumericalError
from core.mcmc.sampler import Chain
from core.model.context import ModelContext
from core.model.likelihood import conditional_loglik, marginal_loglik
from core.model.params import LatentState, Params

logger = logging.getLogger("spatial_mem.diagnostics")


@dataclass(frozen=True)
class DicResult:
    dic: float
    p_d: float
    mean_deviance: float
    deviance_at_mean: float
    likelihood: str = "marginal"

    def as_dict(self) -> dict:
        return {"dic": self.dic, "p_d": self.p_d, "mean_deviance": self.mean_deviance,
                "deviance_at_mean": self.deviance_at_mean, "likelihood": self.likelihood}


def _pooled(chain: Union[Chain, Sequence[Chain]]):
    chains = [chain] if isinstance(chain, Chain) else list(chain)
    if not chains or sum(len(c) for c in chains) == 0:
        raise ValueError("DIC needs a non-empty chain")
    return chains


def _marginal(chains, data, kernel) -> DicResult:
    ctx = ModelContext.build(data, kernel)
    deviances = [-2.0 * marginal_loglik(params, data, kernel, ctx)
                 for c in chains for params, _ in c.draws]
    pooled = np.vstack([c.params for c in chains])
    mean_params = Params.from_vector(pooled.mean(axis=0), chains[0].p)
    d_bar = float(np.mean(deviances))
    d_hat = -2.0 * marginal_loglik(mean_params, data, kernel, ctx)
    return DicResult(2.0 * d_bar - d_hat, d_bar - d_hat, d_bar, d_hat, "marginal")


def _conditional(chains, data) -> DicResult:
    deviances = [-2.0 * conditional_loglik(params, latent, data)
                 for c in chains for params, latent in c.draws]
    pooled = np.vstack([c.params for c in chains])
    mean_params = Params.from_vector(pooled.mean(axis=0), chains[0].p)
    mean_latent = LatentState(np.vstack([c.epsilon for c in chains]).mean(axis=0),
                              np.concatenate([c.v for c in chains]).mean(axis=0))
    d_bar = float(np.mean(deviances))
    d_hat = -2.0 * conditional_loglik(mean_params, mean_latent, data)
    return DicResult(2.0 * d_bar - d_hat, d_bar - d_hat, d_bar, d_hat, "conditional")


def dic_components(chain: Union[Chain, Sequence[Chain]], data, kernel) -> DicResult:
    """
    DIC with its pieces

    Falls back to the conditional (white-noise) deviance given eps and V when
    the marginal covariance cannot be factored.
    """
    chains = _pooled(chain)
    try:
        result = _marginal(chains, data, kernel)
    except NumericalError as e:
        logger.warning(f"⚠️ Marginal deviance failed ({e}); using conditional deviance")
        result = _conditional(chains, data)
    logger.info(f"📊 DIC {result.dic:.2f} (pD {result.p_d:.2f}, {result.likelihood} likelihood)")
    return result


def dic(chain: Union[Chain, Sequence[Chain]], data, kernel) -> float:
    return dic_components(chain, data, kernel).dic

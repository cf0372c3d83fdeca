"""
Posterior summaries: mean (EVal), variance (EVar) and quantiles per parameter
"""
from typing import Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from core.mcmc.sampler import Chain

DEFAULT_PROBS = (0.025, 0.5, 0.975)


def quantile_label(prob: float) -> str:
    pct = prob * 100.0
    return f"q{pct:g}".replace(".", "_")


def summarize(chain, probs: Sequence[float] = DEFAULT_PROBS,
              truth: Optional[Mapping[str, float]] = None) -> pd.DataFrame:
    """
    Component-wise summaries over stored draws

    Args:
        chain: a Chain or a list of chains (pooled)
        probs: quantile levels in (0, 1)
        truth: generating values; adds an AVD column |EVal - truth|

    Returns:
        DataFrame indexed by parameter name with columns mean, var, sd,
        one column per quantile and optionally avd
    """
    chains = [chain] if isinstance(chain, Chain) else list(chain)
    draws = np.vstack([c.params for c in chains])
    if draws.shape[0] == 0:
        raise ValueError("Cannot summarize an empty chain")
    probs = sorted(float(q) for q in probs)

    ddof = 1 if draws.shape[0] > 1 else 0
    frame = pd.DataFrame(index=pd.Index(chains[0].names, name="parameter"))
    frame["mean"] = draws.mean(axis=0)
    frame["var"] = draws.var(axis=0, ddof=ddof)
    frame["sd"] = np.sqrt(frame["var"])
    for prob, column in zip(probs, np.quantile(draws, probs, axis=0)):
        frame[quantile_label(prob)] = column
    if truth:
        frame["avd"] = [abs(m - truth[name]) if name in truth else np.nan
                        for name, m in zip(frame.index, frame["mean"])]
    return frame

"""
Prior and initial-value sensitivity

relative change = |mean_alt - mean_bench| / sd_bench, per parameter;
MRE is the maximum relative change over the elements of a parameter vector.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from core.mcmc.sampler import Chain

logger = logging.getLogger("spatial_mem.diagnostics")


def parameter_group(name: str) -> str:
    """beta_1 -> beta, theta_2 -> theta, sigma2 -> sigma2"""
    head, _, tail = name.rpartition("_")
    return head if head and tail.isdigit() else name


@dataclass
class SensitivityReport:
    values: Dict[str, float]
    mre: Dict[str, float]
    degenerate: List[str] = field(default_factory=list)

    def row(self) -> Dict[str, float]:
        return {**self.values, **{f"MRE({g})": v for g, v in self.mre.items()}}


def _pooled(chain) -> tuple:
    chains = [chain] if isinstance(chain, Chain) else list(chain)
    return np.vstack([c.params for c in chains]), chains[0].names


def relative_change(benchmark, alternative, selector: Optional[Sequence[str]] = None) -> SensitivityReport:
    """
    Standardized shift of posterior means from a benchmark fit

    Args:
        benchmark, alternative: chains (or lists of chains) fitted to the same data
        selector: parameter names to compare; all shared columns by default
    """
    bench, names = _pooled(benchmark)
    alt, alt_names = _pooled(alternative)
    names = [n for n in (selector or names) if n in names and n in alt_names]
    if not names:
        raise ValueError("No common parameters to compare")

    values: Dict[str, float] = {}
    degenerate: List[str] = []
    for name in names:
        b = bench[:, _index(benchmark, name)]
        a = alt[:, _index(alternative, name)]
        shift = abs(float(a.mean()) - float(b.mean()))
        sd = float(b.std(ddof=1)) if len(b) > 1 else 0.0
        if sd == 0.0:
            degenerate.append(name)
            values[name] = 0.0 if shift == 0.0 else float("inf")
        else:
            values[name] = shift / sd

    mre: Dict[str, float] = {}
    for name, value in values.items():
        group = parameter_group(name)
        mre[group] = max(mre.get(group, 0.0), value)
    if degenerate:
        logger.warning(f"⚠️ Zero benchmark sd for {degenerate}; relative change flagged degenerate")
    return SensitivityReport(values=values, mre=mre, degenerate=degenerate)


def _index(chain, name: str) -> int:
    first = chain if isinstance(chain, Chain) else list(chain)[0]
    return first.names.index(name)


def sensitivity_table(benchmark, alternatives: Mapping[str, object],
                      selector: Optional[Sequence[str]] = None) -> pd.DataFrame:
    """One row per alternative: relative change per parameter and MRE per group"""
    rows = {label: relative_change(benchmark, alt, selector).row() for label, alt in alternatives.items()}
    frame = pd.DataFrame.from_dict(rows, orient="index")
    frame.index.name = "setting"
    return frame

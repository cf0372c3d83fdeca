"""
Gelman-Rubin convergence diagnostic

Whole chains are compared (no half-splitting) and no degrees-of-freedom
correction is applied:

    W     = mean of within-chain variances
    B / L = variance of the chain means
    V     = (L - 1) / L * W + B / L
    PSRF  = sqrt(V / W)
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

logger = logging.getLogger("spatial_mem.diagnostics")

MIN_CHAINS = 2
MIN_LENGTH = 10
DEFAULT_THRESHOLD = 1.1
# chains flatter than this, relative to the trace magnitude, count as constant
DEGENERATE_RTOL = 1e-12


@dataclass
class Psrf:
    """Per-parameter potential scale reduction factors"""
    values: Dict[str, float]
    degenerate: List[str] = field(default_factory=list)
    n_chains: int = 0
    length: int = 0

    def max(self) -> float:
        finite = [v for k, v in self.values.items() if k not in self.degenerate]
        return max(finite) if finite else float("nan")

    def offenders(self, threshold: float = DEFAULT_THRESHOLD) -> Dict[str, float]:
        """Non-degenerate parameters whose PSRF exceeds threshold"""
        return {k: v for k, v in self.values.items()
                if k not in self.degenerate and not v <= threshold}

    def converged(self, threshold: float = DEFAULT_THRESHOLD) -> bool:
        return not self.offenders(threshold)


def psrf(traces: np.ndarray) -> Tuple[float, bool]:
    """
    PSRF of one scalar parameter

    Args:
        traces: (k, L) array, one row per chain

    Returns:
        (psrf, degenerate); degenerate when every chain is constant up to
        rounding, then psrf is 1 for equal chains and inf otherwise
    """
    traces = np.asarray(traces, dtype=float)
    if traces.ndim != 2:
        raise ValueError("traces must be a (chains, length) array")
    k, length = traces.shape
    if k < MIN_CHAINS:
        raise ValueError(f"Gelman-Rubin needs at least {MIN_CHAINS} chains, got {k}")
    if length < MIN_LENGTH:
        raise ValueError(f"Gelman-Rubin needs chains of length >= {MIN_LENGTH}, got {length}")

    means = np.mean(traces, axis=1)
    tol = DEGENERATE_RTOL * max(1.0, float(np.max(np.abs(traces))))
    if float(np.max(np.ptp(traces, axis=1))) <= tol:
        return (1.0 if float(np.ptp(means)) <= tol else math.inf), True

    w = float(np.mean(np.var(traces, axis=1, ddof=1)))
    b_over_l = float(np.var(means, ddof=1))
    v_hat = (length - 1) / length * w + b_over_l
    return math.sqrt(v_hat / w), False


def gelman_rubin(chains: Sequence, names: Sequence[str] = None) -> Psrf:
    """
    PSRF for every parameter column of a set of chains

    Args:
        chains: Chain objects, or (L, d) arrays, all of the same length
        names: column names when arrays are passed
    """
    arrays = [np.asarray(getattr(c, "params", c), dtype=float) for c in chains]
    arrays = [a.reshape(-1, 1) if a.ndim == 1 else a for a in arrays]
    if len({a.shape for a in arrays}) != 1:
        raise ValueError("Gelman-Rubin needs chains of identical shape")
    if names is None:
        names = getattr(chains[0], "names", None) or [f"x{j}" for j in range(arrays[0].shape[1])]

    stacked = np.stack(arrays)
    values: Dict[str, float] = {}
    degenerate: List[str] = []
    for j, name in enumerate(names):
        value, flat = psrf(stacked[:, :, j])
        values[name] = value
        if flat:
            degenerate.append(name)

    result = Psrf(values=values, degenerate=degenerate, n_chains=stacked.shape[0], length=stacked.shape[1])
    if degenerate:
        logger.warning(f"⚠️ Zero within-chain variance for {degenerate}; PSRF flagged degenerate")
    logger.info(f"📊 PSRF over {result.n_chains} chains x {result.length} draws: max {result.max():.4f}")
    return result

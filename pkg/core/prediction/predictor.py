"""
Bayesian spatial prediction at unobserved locations

For every stored posterior draw (eta, eps, V) and every new site s0:
1. draw v0 ~ N(0, I) on the error-prone columns
2. compute the per-draw conditional normal of y0
3. draw y0 from it
The predictive summary at s0 averages over draws.

Two conditionings are available:
- "latent" (default): condition on the sampled field eps,
      mean = mu0'b + s t v0'b + s r' C^{-1} eps
      var  = s2 [(1 + w2) - r' C^{-1} r]
- "marginal": integrate eps out and condition on the residual,
      mean = mu0'b + s t v0'b + r' (C + w2 I)^{-1} (y - mu b - s t V b)
      var  = s2 [(1 + w2) - r' (C + w2 I)^{-1} r]
They coincide as w2 -> 0.

Each site draws from its own RNG stream keyed on its coordinates, so
summaries do not depend on the order in which sites are requested.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy.linalg import solve_triangular

from core.correlation.kernels import KernelSpec
from core.correlation.spd import spd_factor, spd_solve
from core.data.dataset import SpatialDataset, read_csv_exact
from core.data.distances import cross_distances
from core.errors import DatasetError, NumericalError
from core.mcmc.sampler import Chain
from core.model.context import ModelContext
from core.stats.rng import RngState

logger = logging.getLogger("spatial_mem.prediction")

DEFAULT_PROBS = (0.05, 0.5, 0.95)
CONDITIONING_MODES = ("latent", "marginal")
SITE_CHUNK = 256


@dataclass(frozen=True)
class PredictionRequest:
    """New sites and their design rows (intercept included)"""
    coords: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float).reshape(-1, 2)
        mu = np.asarray(self.mu, dtype=float)
        if mu.ndim == 1:
            mu = mu.reshape(1, -1)
        if coords.shape[0] < 1:
            raise ValueError("A prediction request needs at least one location")
        if mu.shape[0] != coords.shape[0]:
            raise ValueError(f"new_mu has {mu.shape[0]} rows for {coords.shape[0]} locations")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "mu", mu)

    @property
    def m(self) -> int:
        return self.coords.shape[0]

    @classmethod
    def from_dataset(cls, data: SpatialDataset) -> "PredictionRequest":
        return cls(data.coords, data.mu)


@dataclass
class PredictiveSummary:
    """Per-site predictive moments and quantiles"""
    coords: np.ndarray
    mean: np.ndarray
    sd: np.ndarray
    quantiles: Dict[float, np.ndarray]
    n_draws: int
    draws: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def mc_se(self) -> np.ndarray:
        """Monte Carlo standard error of the mean (independent-draw approximation)"""
        return self.sd / np.sqrt(max(self.n_draws, 1))

    def frame(self) -> pd.DataFrame:
        data = {"x": self.coords[:, 0], "y": self.coords[:, 1], "mean": self.mean, "sd": self.sd}
        for prob in sorted(self.quantiles):
            data[f"q{int(round(prob * 100)):02d}"] = self.quantiles[prob]
        return pd.DataFrame(data)


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid; nodes are listed row-major (y outer, x inner)"""
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("Grid resolution must be at least 2 per axis")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError("Grid ranges must be increasing")

    def nodes(self) -> np.ndarray:
        xs = np.linspace(self.x_min, self.x_max, self.nx)
        ys = np.linspace(self.y_min, self.y_max, self.ny)
        gx, gy = np.meshgrid(xs, ys, indexing="xy")
        return np.column_stack([gx.ravel(), gy.ravel()])


CovariateProvider = Callable[[np.ndarray], np.ndarray]


class ConstantCovariates:
    """Same covariate vector at every node"""

    def __init__(self, values: Sequence[float]):
        self.values = np.asarray(values, dtype=float).reshape(-1)

    def __call__(self, coords: np.ndarray) -> np.ndarray:
        return np.tile(self.values, (coords.shape[0], 1))


class TableCovariates:
    """Per-node covariates supplied in node order"""

    def __init__(self, table: np.ndarray):
        self.table = np.asarray(table, dtype=float)
        if self.table.ndim == 1:
            self.table = self.table.reshape(-1, 1)

    @classmethod
    def from_csv(cls, path: Union[str, Path], columns: Sequence[str]) -> "TableCovariates":
        frame = read_csv_exact(path)
        missing = [c for c in columns if c not in frame.columns]
        if missing:
            raise DatasetError(f"{path}: missing covariate column(s) {missing}")
        return cls(frame[list(columns)].to_numpy(dtype=float))

    def __call__(self, coords: np.ndarray) -> np.ndarray:
        if self.table.shape[0] != coords.shape[0]:
            raise DatasetError(f"Covariate table has {self.table.shape[0]} rows for {coords.shape[0]} nodes")
        return self.table


def _as_chains(chain: Union[Chain, Sequence[Chain]]) -> List[Chain]:
    chains = [chain] if isinstance(chain, Chain) else list(chain)
    if not chains or sum(len(c) for c in chains) == 0:
        raise ValueError("Prediction needs a non-empty chain")
    return chains


def _site_rng(base_seed: int, xy: np.ndarray) -> RngState:
    bits = np.asarray(xy, dtype=np.float64).view(np.uint64)
    words = [int(base_seed)] + [int(b) for b in bits]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(words)))


def conditional_moments(params, latent, data: SpatialDataset, kind, new_coords: np.ndarray,
                        new_mu: np.ndarray, v0: np.ndarray, conditioning: str = "latent",
                        ctx: Optional[ModelContext] = None):
    """
    Per-draw conditional mean and variance of y0 at each new site

    Args:
        v0: (m, p) measurement-error field at the new sites

    Returns:
        (mean (m,), variance (m,))
    """
    if conditioning not in CONDITIONING_MODES:
        raise ValueError(f"conditioning must be one of {CONDITIONING_MODES}")
    ctx = ctx or ModelContext.build(data, kind)
    kernel = KernelSpec(ctx.kind, params.theta)
    c = ctx.corr(params.theta)
    r = np.asarray(kernel.corr(cross_distances(data.coords, new_coords)), dtype=float)

    sigma, tau = params.sigma, params.tau
    base = new_mu @ params.beta + sigma * tau * (v0 @ params.beta)
    if conditioning == "latent":
        factor = spd_factor(c)
        krig = sigma * (r.T @ spd_solve(factor, latent.epsilon))
    else:
        factor = spd_factor(c + params.omega2 * np.eye(data.n))
        resid = data.y - data.mu @ params.beta - sigma * tau * (latent.v @ params.beta)
        krig = r.T @ spd_solve(factor, resid)
    a = solve_triangular(factor.lower, r, lower=True, check_finite=False)
    quad = np.sum(a * a, axis=0)
    variance = params.sigma2 * ((1.0 + params.omega2) - quad)
    return base + krig, variance


def predict_at(chain: Union[Chain, Sequence[Chain]], data: SpatialDataset, kernel,
               req: PredictionRequest, rng: RngState, probs: Sequence[float] = DEFAULT_PROBS,
               conditioning: str = "latent", keep_draws: bool = False) -> PredictiveSummary:
    """
    Sample the predictive distribution at the requested sites

    Raises:
        DatasetError: a new site coincides with a data location, or the
            design rows have the wrong width
        NumericalError: non-positive conditional variance
    """
    chains = _as_chains(chain)
    if req.mu.shape[1] != data.p:
        raise DatasetError(f"new_mu has {req.mu.shape[1]} columns, dataset has {data.p}")
    dmin = cross_distances(data.coords, req.coords).min(axis=0)
    if np.any(dmin == 0.0):
        j = int(np.argmax(dmin == 0.0))
        raise DatasetError(f"Prediction site {j} coincides with a data location")

    ctx = ModelContext.build(data, kernel)
    n_draws = sum(len(c) for c in chains)
    base_seed = int(rng.integers(0, 2 ** 63 - 1))
    mask = data.error_mask

    means = np.empty(req.m)
    sds = np.empty(req.m)
    quant = {float(q): np.empty(req.m) for q in probs}
    all_draws = np.empty((n_draws, req.m)) if keep_draws else None

    for start in range(0, req.m, SITE_CHUNK):
        stop = min(start + SITE_CHUNK, req.m)
        coords = req.coords[start:stop]
        k = stop - start
        # per-site streams: v0 for every draw, then one normal per draw
        site_rngs = [_site_rng(base_seed, xy) for xy in coords]
        v0_all = np.zeros((n_draws, k, data.p))
        z_all = np.empty((n_draws, k))
        for j, srng in enumerate(site_rngs):
            v0_all[:, j, mask] = srng.standard_normal((n_draws, int(mask.sum())))
            z_all[:, j] = srng.standard_normal(n_draws)

        y0 = np.empty((n_draws, k))
        i = 0
        for c in chains:
            for params, latent in c.draws:
                mean, var = conditional_moments(params, latent, data, ctx.kind, coords,
                                                req.mu[start:stop], v0_all[i], conditioning, ctx)
                if np.any(var <= 0):
                    raise NumericalError(f"Non-positive predictive variance at draw {i}")
                y0[i] = mean + np.sqrt(var) * z_all[i]
                i += 1

        means[start:stop] = y0.mean(axis=0)
        sds[start:stop] = y0.std(axis=0, ddof=1) if n_draws > 1 else 0.0
        qs = np.quantile(y0, list(quant), axis=0)
        for row, q in enumerate(quant):
            quant[q][start:stop] = qs[row]
        if keep_draws:
            all_draws[:, start:stop] = y0

    logger.info(f"📊 Predicted {req.m} site(s) from {n_draws} posterior draw(s)")
    return PredictiveSummary(coords=req.coords, mean=means, sd=sds, quantiles=quant,
                             n_draws=n_draws, draws=all_draws)


def predict_grid(chain, data: SpatialDataset, kernel, grid: GridSpec,
                 covariate_provider: CovariateProvider, rng: RngState,
                 probs: Sequence[float] = DEFAULT_PROBS, conditioning: str = "latent") -> PredictiveSummary:
    """Predictive summaries at every grid node, row-major"""
    nodes = grid.nodes()
    covariates = np.asarray(covariate_provider(nodes), dtype=float).reshape(nodes.shape[0], -1)
    new_mu = np.column_stack([np.ones(nodes.shape[0]), covariates])
    return predict_at(chain, data, kernel, PredictionRequest(nodes, new_mu), rng, probs, conditioning)


def write_predictions(summary: PredictiveSummary, path: Union[str, Path]) -> Path:
    """CSV with columns x, y, mean, sd and one column per quantile"""
    path = Path(path)
    summary.frame().to_csv(path, index=False, float_format="%.10g")
    return path


def evaluate_holdout(summary: PredictiveSummary, y_true: np.ndarray,
                     interval: Sequence[float] = (0.05, 0.95)) -> Dict[str, float]:
    """RMSE, MAE and empirical interval coverage against held-out responses"""
    y_true = np.asarray(y_true, dtype=float)
    err = summary.mean - y_true
    out = {
        "rmse": float(np.sqrt(np.mean(err ** 2))),
        "mae": float(np.mean(np.abs(err))),
        "n": int(len(y_true)),
    }
    lo, hi = interval
    if lo in summary.quantiles and hi in summary.quantiles:
        inside = (y_true >= summary.quantiles[lo]) & (y_true <= summary.quantiles[hi])
        out["coverage"] = float(np.mean(inside))
    return out

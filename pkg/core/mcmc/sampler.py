"""
MCMC driver for the spatial measurement-error model

This module runs the sampler end to end:
1. SamplerConfig: iterations, burn-in, thinning, chains, MH step sizes, seed
2. gibbs_sweep: one pass in the fixed order eps -> V -> beta -> sigma2 ->
   omega2 -> tau2 -> theta
3. run_chain: burn-in with Robbins-Monro step-size adaptation (frozen
   afterwards), thinning and acceptance bookkeeping
4. run_chains: independent chains on a worker pool, one split RNG stream each
5. successive_conditional_sweeps: the prior-reproduction simulator that
   alternates data regeneration with sweeps

The naive model runs the same sweep with tau2 = 0 and V = 0, skipping the V
and tau2 blocks.
"""
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace, asdict
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from core.correlation.kernels import KernelKind
from core.data.dataset import SpatialDataset
from core.errors import NumericalError, SamplerError
from core.mcmc import blocks
from core.mcmc.blocks import ChainState
from core.mem_logger import logger as mem_logger
from core.model.context import ModelContext, kernel_kind
from core.model.params import Hyperparams, LatentState, Params, param_names
from core.model.priors import sample_prior
from core.stats.rng import RngState, keyed_rngs, make_rng, spawn_rngs
from core.stats.samplers import sample_mvn
from core.correlation.spd import spd_factor

MH_BLOCKS = ("sigma2", "tau2", "theta_1", "theta_2")
DEFAULT_STEPS = {"sigma2": 0.3, "tau2": 0.6, "theta_1": 0.5, "theta_2": 0.5}
STEP_BOUNDS = (1e-4, 10.0)
# seed namespace of the dispersed starting values
INIT_STREAM_KEY = 3


@dataclass(frozen=True)
class SamplerConfig:
    """Run length, MH tuning and reproducibility settings of a fit"""
    n_iter: int = 75000
    burn_in: int = 25000
    thin: int = 10
    n_chains: int = 1
    mh_step_sizes: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_STEPS))
    seed: int = 0
    naive: bool = False
    adapt: bool = True
    target_acceptance: float = 0.35
    v_recovery: str = "min_norm"
    workers: int = 1
    progress_every: int = 5000

    def __post_init__(self):
        if self.n_iter < 1:
            raise ValueError(f"n_iter must be positive, got {self.n_iter}")
        if not 0 <= self.burn_in < self.n_iter:
            raise ValueError(f"burn_in must satisfy 0 <= burn_in < n_iter, got {self.burn_in}")
        if self.thin < 1:
            raise ValueError(f"thin must be >= 1, got {self.thin}")
        if self.n_chains < 1:
            raise ValueError(f"n_chains must be >= 1, got {self.n_chains}")
        steps = dict(DEFAULT_STEPS)
        steps.update(self.mh_step_sizes or {})
        unknown = set(steps) - set(MH_BLOCKS)
        if unknown:
            raise ValueError(f"Unknown MH blocks in step sizes: {sorted(unknown)}")
        if any(not (s > 0 and math.isfinite(s)) for s in steps.values()):
            raise ValueError(f"MH step sizes must be positive, got {steps}")
        if self.v_recovery not in blocks.V_RECOVERY_MODES:
            raise ValueError(f"v_recovery must be one of {blocks.V_RECOVERY_MODES}")
        if not 0 < self.target_acceptance < 1:
            raise ValueError("target_acceptance must lie in (0, 1)")
        object.__setattr__(self, "mh_step_sizes", steps)

    @property
    def n_kept(self) -> int:
        return (self.n_iter - self.burn_in) // self.thin

    def with_(self, **changes) -> "SamplerConfig":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class Chain:
    """
    Thinned post-burn-in draws of one chain

    params rows follow param_names(p, n_theta); epsilon is (m, n) and v is
    (m, n, p).
    """
    params: np.ndarray
    epsilon: np.ndarray
    v: np.ndarray
    iterations: np.ndarray
    acceptance_rates: Dict[str, float]
    config: SamplerConfig
    kind: KernelKind
    p: int
    seed: Optional[int] = None
    chain_id: int = 0
    step_sizes: Dict[str, float] = field(default_factory=dict)

    def __len__(self) -> int:
        return self.params.shape[0]

    @property
    def n_theta(self) -> int:
        return self.params.shape[1] - self.p - 3

    @property
    def names(self) -> List[str]:
        return param_names(self.p, self.n_theta)

    def column(self, name: str) -> np.ndarray:
        return self.params[:, self.names.index(name)]

    def param(self, i: int) -> Params:
        return Params.from_vector(self.params[i], self.p)

    def latent(self, i: int) -> LatentState:
        return LatentState(self.epsilon[i], self.v[i])

    @property
    def draws(self) -> Iterator[Tuple[Params, LatentState]]:
        for i in range(len(self)):
            yield self.param(i), self.latent(i)

    def mean_params(self) -> Params:
        return Params.from_vector(self.params.mean(axis=0), self.p)


def initial_latent(n: int, mask: np.ndarray, rng: RngState, variance: float = 0.31,
                   scale_is_sd: bool = False, naive: bool = False) -> LatentState:
    """eps_i and v_ij i.i.d. N(0, variance); V is zero outside error-prone columns"""
    sd = variance if scale_is_sd else math.sqrt(variance)
    epsilon = rng.normal(0.0, sd, size=n)
    v = np.zeros((n, len(mask)))
    draws = rng.normal(0.0, sd, size=(n, int(mask.sum())))
    if not naive:
        v[:, mask] = draws
    return LatentState(epsilon, v)


def dispersed_init(base: Params, rng: RngState, spread: float = 0.5) -> Params:
    """Over-dispersed starting point around `base` for an extra chain"""
    factor = lambda: math.exp(spread * rng.standard_normal())
    beta = base.beta + spread * (np.abs(base.beta) + 1.0) * rng.standard_normal(len(base.beta))
    return Params(beta=beta, sigma2=base.sigma2 * factor(), omega2=base.omega2 * factor(),
                  tau2=base.tau2 * factor() if base.tau2 > 0 else 0.0,
                  theta=tuple(t * factor() for t in base.theta))


class StepSizeAdapter:
    """Robbins-Monro tuning of log step sizes toward a target acceptance rate"""

    def __init__(self, steps: Dict[str, float], target: float, enabled: bool = True):
        self.log_steps = {k: math.log(v) for k, v in steps.items()}
        self.target = target
        self.enabled = enabled
        self.counts = {k: 0 for k in steps}

    def update(self, block: str, accepted: bool):
        if not self.enabled:
            return
        self.counts[block] += 1
        gain = self.counts[block] ** -0.6
        lo, hi = (math.log(b) for b in STEP_BOUNDS)
        self.log_steps[block] = min(hi, max(lo, self.log_steps[block] + gain * (float(accepted) - self.target)))

    def freeze(self):
        self.enabled = False

    def step(self, block: str) -> float:
        return math.exp(self.log_steps[block])

    def steps(self) -> Dict[str, float]:
        return {k: math.exp(v) for k, v in self.log_steps.items()}


def gibbs_sweep(state: ChainState, ctx: ModelContext, hyper: Hyperparams, steps: Dict[str, float],
                rng: RngState, v_recovery: str = "min_norm") -> Dict[str, bool]:
    """One full sweep; returns MH acceptance flags per block"""
    accepted: Dict[str, bool] = {}

    state.epsilon = blocks.sample_epsilon(state, ctx, rng)

    if not state.naive:
        state.v, _ = blocks.sample_v(state, ctx, rng, mode=v_recovery)

    state.beta = blocks.sample_beta(state, ctx, hyper, rng)

    state.sigma2, accepted["sigma2"] = blocks.mh_sigma2(state, ctx, hyper, steps["sigma2"], rng)

    state.omega2 = blocks.sample_omega2(state, ctx, hyper, rng)

    if not state.naive and ctx.data.has_error_prone:
        state.tau2, accepted["tau2"] = blocks.mh_tau2(state, ctx, hyper, steps["tau2"], rng)

    theta_steps = [steps[f"theta_{k + 1}"] for k in range(len(state.theta))]
    theta, flags = blocks.mh_theta(state, ctx, hyper, theta_steps, rng)
    state.theta = theta
    for k, flag in enumerate(flags):
        accepted[f"theta_{k + 1}"] = flag

    return accepted


def run_chain(data: SpatialDataset, kernel, hyper: Hyperparams, init: Tuple[Params, LatentState],
              config: SamplerConfig, rng: Optional[RngState] = None, chain_id: int = 0,
              ctx: Optional[ModelContext] = None) -> Chain:
    """
    Run one chain and keep every thin-th draw after burn-in

    Raises:
        SamplerError: a numerical failure, tagged with the iteration index
    """
    ctx = ctx or ModelContext.build(data, kernel)
    rng = rng or make_rng(config.seed)
    params, latent = init
    if len(params.theta) != (2 if ctx.kind is KernelKind.MATERN else 1):
        raise ValueError(f"Initial theta {params.theta} does not match kernel {ctx.kind.value}")

    state = ChainState.from_(params, latent, naive=config.naive or not data.has_error_prone)
    adapter = StepSizeAdapter(config.mh_step_sizes, config.target_acceptance, enabled=config.adapt)

    m = config.n_kept
    k = data.p + 3 + len(params.theta)
    out_params = np.empty((m, k))
    out_eps = np.empty((m, data.n))
    out_v = np.empty((m, data.n, data.p))
    out_iter = np.empty(m, dtype=int)
    proposed = {b: 0 for b in MH_BLOCKS}
    accepted_post = {b: 0 for b in MH_BLOCKS}
    proposed_all = {b: 0 for b in MH_BLOCKS}
    accepted_all = {b: 0 for b in MH_BLOCKS}

    mem_logger.start_chain(chain_id, config.n_iter, config.seed)
    started = time.monotonic()
    stored = 0
    for it in range(1, config.n_iter + 1):
        try:
            flags = gibbs_sweep(state, ctx, hyper, adapter.steps(), rng, config.v_recovery)
        except (NumericalError, np.linalg.LinAlgError) as e:
            raise SamplerError(it, e) from e

        post_burn = it > config.burn_in
        for block, flag in flags.items():
            adapter.update(block, flag)
            mem_logger.record_mh(chain_id, block, flag)
            proposed_all[block] += 1
            accepted_all[block] += flag
            if post_burn:
                proposed[block] += 1
                accepted_post[block] += flag

        if it == config.burn_in:
            adapter.freeze()
            mem_logger.log("burn_in_completed", {"chain_id": chain_id, "step_sizes": adapter.steps()})

        if post_burn and (it - config.burn_in) % config.thin == 0 and stored < m:
            out_params[stored] = np.concatenate(
                [state.beta, [state.sigma2, state.omega2, state.tau2], state.theta])
            out_eps[stored] = state.epsilon
            out_v[stored] = state.v
            out_iter[stored] = it
            stored += 1

        mem_logger.log_progress(chain_id, it, config.progress_every)

    counts, hits = (proposed, accepted_post) if any(proposed.values()) else (proposed_all, accepted_all)
    rates = {b: hits[b] / counts[b] for b in MH_BLOCKS if counts[b] > 0}
    mem_logger.complete_chain(chain_id)
    mem_logger.log("chain_timing", {"chain_id": chain_id, "seconds": round(time.monotonic() - started, 3)})

    return Chain(params=out_params, epsilon=out_eps, v=out_v, iterations=out_iter,
                 acceptance_rates=rates, config=config, kind=ctx.kind, p=data.p,
                 seed=config.seed, chain_id=chain_id, step_sizes=adapter.steps())


def chain_inits(base: Params, data: SpatialDataset, config: SamplerConfig, latent_variance: float = 0.31,
                scale_is_sd: bool = False, spread: float = 0.5) -> List[Tuple[Params, LatentState]]:
    """Initial values for every chain: chain 0 starts at `base`, the rest are dispersed"""
    naive = config.naive or not data.has_error_prone
    if naive:
        base = base.with_(tau2=0.0)
    rngs = keyed_rngs(config.seed, INIT_STREAM_KEY, config.n_chains)
    inits = []
    for c, rng in enumerate(rngs):
        params = base if c == 0 else dispersed_init(base, rng, spread)
        inits.append((params, initial_latent(data.n, data.error_mask, rng, latent_variance,
                                             scale_is_sd, naive)))
    return inits


def run_chains(data: SpatialDataset, kernel, hyper: Hyperparams,
               inits: Sequence[Tuple[Params, LatentState]], config: SamplerConfig) -> List[Chain]:
    """Independent chains, each with its own RNG stream, merged in chain order"""
    if len(inits) != config.n_chains:
        raise ValueError(f"Expected {config.n_chains} initial states, got {len(inits)}")
    ctx = ModelContext.build(data, kernel)
    rngs = spawn_rngs(config.seed, config.n_chains)

    def _one(c: int) -> Chain:
        return run_chain(data, kernel, hyper, inits[c], config, rng=rngs[c], chain_id=c, ctx=ctx)

    workers = max(1, min(config.workers, config.n_chains))
    if workers == 1:
        return [_one(c) for c in range(config.n_chains)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_one, range(config.n_chains)))


def simulate_response(params: Params, latent: LatentState, data: SpatialDataset,
                      rng: RngState) -> np.ndarray:
    """y = mu beta + sigma eps + sigma omega rho + sigma tau V beta"""
    sigma = params.sigma
    rho = rng.standard_normal(data.n)
    return (data.mu @ params.beta + sigma * latent.epsilon
            + sigma * math.sqrt(params.omega2) * rho + sigma * params.tau * (latent.v @ params.beta))


def successive_conditional_sweeps(data: SpatialDataset, kernel, hyper: Hyperparams, n_sweeps: int,
                                  rng: RngState, steps: Optional[Dict[str, float]] = None,
                                  v_recovery: str = "conditional") -> np.ndarray:
    """
    Prior-reproduction simulator

    Draws (eta, eps, V) from the prior, then alternates regenerating y from
    the model with one Gibbs sweep. Every recorded eta is then marginally a
    prior draw when all conditionals are correct. The response column of
    `data` is ignored. Returns an (n_sweeps, k) array ordered as param_names.
    """
    ctx = ModelContext.build(data, kernel)
    n_theta = 2 if ctx.kind is KernelKind.MATERN else 1
    steps = dict(DEFAULT_STEPS, **(steps or {}))

    params = sample_prior(hyper, data.p, n_theta, ctx.med_d, rng)
    corr = spd_factor(ctx.corr(params.theta))
    epsilon = sample_mvn(np.zeros(data.n), corr, rng, precision=False)
    v = np.zeros((data.n, data.p))
    v[:, data.error_mask] = rng.standard_normal((data.n, int(data.error_mask.sum())))
    state = ChainState.from_(params, LatentState(epsilon, v))

    out = np.empty((n_sweeps, data.p + 3 + n_theta))
    for s in range(n_sweeps):
        y = simulate_response(state.to_params(), state.to_latent(), data, rng)
        sim = SpatialDataset(data.coords, y, data.mu, data.error_mask, list(data.names))
        ctx = replace(ctx, data=sim)
        gibbs_sweep(state, ctx, hyper, steps, rng, v_recovery)
        out[s] = np.concatenate([state.beta, [state.sigma2, state.omega2, state.tau2], state.theta])
    return out

"""
Full conditionals of the Gibbs / Metropolis-within-Gibbs sweep

Closed-form blocks:
1. eps | ...        ~ N_n(A1^{-1} z*, A1^{-1}),  A1 = I/omega2 + C^{-1}
2. w = V b | ...    ~ N_n(A2^{-1} r*, A2^{-1}),  A2 = (tau2/omega2 + 1/b'b) I
3. beta | ...       ~ N_p(A3^{-1} F, A3^{-1}),   A3 = T*'T*/(sigma2 omega2) + I/c1
4. omega2 | ...     ~ GIG(gamma - n/2, sqrt(d*), c5)

Metropolis-Hastings blocks (Gaussian random walk on the log scale, with the
Jacobian term in the acceptance ratio): sigma2, tau2, theta1, theta2.

Every block reads the mutable ChainState and returns new values; the sampler
decides when to write them back.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from core.correlation.spd import SpdFactor, spd_factor, spd_solve, spd_inv_quad
from core.errors import NotPositiveDefiniteError
from core.model.context import ModelContext
from core.model.likelihood import field_loglik
from core.model.params import Hyperparams, LatentState, Params
from core.stats.gig import GigParams, sample_gig
from core.stats.rng import RngState
from core.stats.samplers import sample_mvn

V_RECOVERY_MODES = ("min_norm", "conditional")


@dataclass
class CorrCache:
    """Factor and inverse of C_theta for one theta"""
    theta: Tuple[float, ...]
    factor: SpdFactor
    inverse: np.ndarray


@dataclass
class ChainState:
    """Current values of every sampled quantity of one chain"""
    beta: np.ndarray
    sigma2: float
    omega2: float
    tau2: float
    theta: Tuple[float, ...]
    epsilon: np.ndarray
    v: np.ndarray
    naive: bool = False
    _corr: Optional[CorrCache] = field(default=None, repr=False)

    @classmethod
    def from_(cls, params: Params, latent: LatentState, naive: bool = False) -> "ChainState":
        v = np.array(latent.v, dtype=float)
        tau2 = params.tau2
        if naive:
            v[:] = 0.0
            tau2 = 0.0
        return cls(beta=np.array(params.beta, dtype=float), sigma2=float(params.sigma2),
                   omega2=float(params.omega2), tau2=float(tau2), theta=tuple(params.theta),
                   epsilon=np.array(latent.epsilon, dtype=float), v=v, naive=naive)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @property
    def tau(self) -> float:
        return math.sqrt(self.tau2)

    def to_params(self) -> Params:
        return Params(beta=self.beta, sigma2=self.sigma2, omega2=self.omega2,
                      tau2=self.tau2, theta=self.theta)

    def to_latent(self) -> LatentState:
        return LatentState(epsilon=self.epsilon, v=self.v)

    def vbeta(self) -> np.ndarray:
        return self.v @ self.beta

    def corr(self, ctx: ModelContext) -> CorrCache:
        """Factor and inverse of C_theta, refreshed when theta changes"""
        if self._corr is None or self._corr.theta != self.theta:
            self._corr = corr_cache(ctx, self.theta)
        return self._corr

    def set_corr(self, cache: CorrCache):
        self._corr = cache


def corr_cache(ctx: ModelContext, theta) -> CorrCache:
    factor = spd_factor(ctx.corr(theta))
    inverse = spd_solve(factor, np.eye(factor.n))
    return CorrCache(theta=tuple(theta), factor=factor, inverse=0.5 * (inverse + inverse.T))


def rw_log_step(x: float, log_target: Callable[[float], float], step: float,
                rng: RngState) -> Tuple[float, bool]:
    """
    One random-walk Metropolis step on log(x)

    The proposal x' = x exp(step z) is symmetric in log(x), so the acceptance
    ratio carries the Jacobian x'/x of the change of variables.
    """
    z = rng.standard_normal()
    u = rng.random()
    if step <= 0:
        return x, False
    x_new = x * math.exp(step * z)
    if not (math.isfinite(x_new) and x_new > 0):
        return x, False
    log_ratio = log_target(x_new) - log_target(x) + math.log(x_new) - math.log(x)
    if math.isnan(log_ratio):
        return x, False
    if u > 0 and math.log(u) < log_ratio:
        return x_new, True
    return x, False


def mh_log_ratio(x: float, x_new: float, log_target: Callable[[float], float]) -> float:
    """log acceptance ratio of the move x -> x_new under rw_log_step"""
    return log_target(x_new) - log_target(x) + math.log(x_new) - math.log(x)


# -- epsilon ----------------------------------------------------------------

def epsilon_moments(state: ChainState, ctx: ModelContext) -> Tuple[np.ndarray, np.ndarray, SpdFactor]:
    """Mean A1^{-1} z*, precision A1 and its factor"""
    data = ctx.data
    z = (data.y - data.mu @ state.beta - state.sigma * state.tau * state.vbeta()) / (state.omega2 * state.sigma)
    precision = state.corr(ctx).inverse + np.eye(data.n) / state.omega2
    factor = spd_factor(precision)
    return spd_solve(factor, z), precision, factor


def sample_epsilon(state: ChainState, ctx: ModelContext, rng: RngState) -> np.ndarray:
    """Draw eps from its Gaussian full conditional (precision form)"""
    mean, _, factor = epsilon_moments(state, ctx)
    return sample_mvn(mean, factor, rng, precision=True)


# -- V ----------------------------------------------------------------------

def v_moments(state: ChainState, ctx: ModelContext) -> Tuple[float, np.ndarray, float]:
    """
    Scalar precision a2, linear term r* and b'b of the w = V b conditional

    Returns a2 = tau2/omega2 + 1/b'b and r* = (tau2/omega2) r with
    r = (y - mu beta - sigma eps) / (sigma tau).
    """
    data = ctx.data
    b = state.beta[data.error_mask]
    bb = float(np.dot(b, b))
    ratio = state.tau2 / state.omega2
    r = (data.y - data.mu @ state.beta - state.sigma * state.epsilon) / (state.sigma * state.tau)
    return ratio + 1.0 / bb, ratio * r, bb


def recover_v(w: np.ndarray, beta: np.ndarray, mask: np.ndarray, rng: Optional[RngState] = None,
              mode: str = "min_norm") -> np.ndarray:
    """
    A V with V beta = w exactly, zero outside error-prone columns

    min_norm: V[:, j] = w beta_j / b'b on masked j.
    conditional: adds N(0, I) noise projected orthogonally to b, the exact
    conditional of V given V b = w under the N(0, I) prior.
    """
    if mode not in V_RECOVERY_MODES:
        raise ValueError(f"Unknown V recovery mode {mode!r}")
    n = len(w)
    v = np.zeros((n, len(beta)))
    b = beta[mask]
    bb = float(np.dot(b, b))
    block = np.outer(w, b) / bb
    if mode == "conditional" and len(b) > 1:
        noise = rng.standard_normal((n, len(b)))
        noise -= np.outer(noise @ b, b) / bb
        block += noise
    v[:, mask] = block
    return v


def sample_v(state: ChainState, ctx: ModelContext, rng: RngState,
             mode: str = "min_norm") -> Tuple[np.ndarray, bool]:
    """
    Draw w = V beta from its conditional and recover V

    Returns (V, updated). When every error-prone coefficient is zero the
    conditional is undefined and the current V is returned unchanged.
    """
    data = ctx.data
    if not data.has_error_prone or state.naive:
        return state.v, False
    b = state.beta[data.error_mask]
    if not np.any(b != 0.0):
        return state.v, False
    a2, r_star, _ = v_moments(state, ctx)
    w = r_star / a2 + rng.standard_normal(data.n) / math.sqrt(a2)
    return recover_v(w, state.beta, data.error_mask, rng, mode), True


# -- beta -------------------------------------------------------------------

def beta_moments(state: ChainState, ctx: ModelContext, hyper: Hyperparams) -> Tuple[np.ndarray, np.ndarray, SpdFactor]:
    """Mean A3^{-1} F, precision A3 and its factor"""
    data = ctx.data
    scale = state.sigma2 * state.omega2
    t = data.y - state.sigma * state.epsilon
    t_star = data.mu + state.sigma * state.tau * state.v
    precision = t_star.T @ t_star / scale + np.eye(data.p) / hyper.c1
    f = t_star.T @ t / scale
    factor = spd_factor(precision)
    return spd_solve(factor, f), precision, factor


def sample_beta(state: ChainState, ctx: ModelContext, hyper: Hyperparams, rng: RngState) -> np.ndarray:
    mean, _, factor = beta_moments(state, ctx, hyper)
    return sample_mvn(mean, factor, rng, precision=True)


# -- sigma2 -----------------------------------------------------------------

def log_target_sigma2(sigma2: float, state: ChainState, ctx: ModelContext, hyper: Hyperparams) -> float:
    """log of (1/s2)^(n/2+c2+1) exp{-sum(q*_i - q_i/s)^2 / (2 omega2) - c3/s2}"""
    data = ctx.data
    q = data.y - data.mu @ state.beta
    q_star = state.epsilon + state.tau * state.vbeta()
    resid = q_star - q / math.sqrt(sigma2)
    return (-(data.n / 2.0 + hyper.c2 + 1.0) * math.log(sigma2)
            - float(np.dot(resid, resid)) / (2.0 * state.omega2) - hyper.c3 / sigma2)


def mh_sigma2(state: ChainState, ctx: ModelContext, hyper: Hyperparams, step: float,
              rng: RngState) -> Tuple[float, bool]:
    return rw_log_step(state.sigma2, lambda s2: log_target_sigma2(s2, state, ctx, hyper), step, rng)


# -- omega2 -----------------------------------------------------------------

def omega2_conditional(state: ChainState, ctx: ModelContext, hyper: Hyperparams) -> GigParams:
    """GIG(gamma - n/2, sqrt(d*), c5) with d* = c4^2 + sum(d_i^2)/sigma2"""
    data = ctx.data
    d = (data.y - data.mu @ state.beta - state.sigma * state.epsilon
         - state.sigma * state.tau * state.vbeta())
    d_star = hyper.c4 ** 2 + float(np.dot(d, d)) / state.sigma2
    return GigParams(hyper.gamma_gig - data.n / 2.0, math.sqrt(d_star), hyper.c5)


def sample_omega2(state: ChainState, ctx: ModelContext, hyper: Hyperparams, rng: RngState) -> float:
    return sample_gig(omega2_conditional(state, ctx, hyper), rng)


# -- tau2 -------------------------------------------------------------------

def log_target_tau2(tau2: float, state: ChainState, ctx: ModelContext, hyper: Hyperparams) -> float:
    """log of (1/t2) exp{-[c6^2/t2 + c7^2 t2 + sum(r*_i - t v_i'b)^2 / omega2] / 2}"""
    data = ctx.data
    r_star = (data.y - data.mu @ state.beta - state.sigma * state.epsilon) / state.sigma
    resid = r_star - math.sqrt(tau2) * state.vbeta()
    return (-math.log(tau2)
            - 0.5 * (hyper.c6 ** 2 / tau2 + hyper.c7 ** 2 * tau2
                     + float(np.dot(resid, resid)) / state.omega2))


def mh_tau2(state: ChainState, ctx: ModelContext, hyper: Hyperparams, step: float,
            rng: RngState) -> Tuple[float, bool]:
    return rw_log_step(state.tau2, lambda t2: log_target_tau2(t2, state, ctx, hyper), step, rng)


# -- theta ------------------------------------------------------------------

def theta_log_prior(theta, hyper: Hyperparams, med_d: float) -> float:
    rate1 = hyper.c8 / med_d
    out = math.log(rate1) - rate1 * theta[0]
    if len(theta) > 1:
        out += math.log(hyper.c9) - hyper.c9 * theta[1]
    return out


def log_target_theta(theta, epsilon: np.ndarray, ctx: ModelContext, hyper: Hyperparams,
                     cache: Optional[CorrCache] = None) -> Tuple[float, Optional[CorrCache]]:
    """
    log |C|^{-1/2} exp(-eps' C^{-1} eps / 2) + log prior(theta)

    Returns (-inf, None) when C_theta cannot be factored.
    """
    if cache is None:
        try:
            cache = corr_cache(ctx, theta)
        except NotPositiveDefiniteError:
            return -math.inf, None
    quad = spd_inv_quad(cache.factor, epsilon)
    value = field_loglik(epsilon, cache.factor.logdet, quad) + theta_log_prior(theta, hyper, ctx.med_d)
    return value, cache


def mh_theta(state: ChainState, ctx: ModelContext, hyper: Hyperparams, steps,
             rng: RngState) -> Tuple[Tuple[float, ...], List[bool]]:
    """
    Component-wise log-scale random walk on the kernel parameters

    C_theta is refactored at each proposal; a proposal whose correlation
    matrix is not positive definite is rejected. The accepted factor is
    stored on the state.
    """
    theta = list(state.theta)
    current_value, current_cache = log_target_theta(tuple(theta), state.epsilon, ctx, hyper,
                                                    cache=state.corr(ctx))
    accepted = []
    for k in range(len(theta)):
        step = float(steps[k])
        z = rng.standard_normal()
        u = rng.random()
        if step <= 0:
            accepted.append(False)
            continue
        proposal = list(theta)
        proposal[k] = theta[k] * math.exp(step * z)
        value, cache = log_target_theta(tuple(proposal), state.epsilon, ctx, hyper)
        if cache is None:
            accepted.append(False)
            continue
        log_ratio = value - current_value + math.log(proposal[k]) - math.log(theta[k])
        if u > 0 and math.log(u) < log_ratio:
            theta, current_value, current_cache = proposal, value, cache
            accepted.append(True)
        else:
            accepted.append(False)
    state.set_corr(current_cache)
    return tuple(theta), accepted

"""
Sampler tests for spatial-mem

These tests verify:
1. Closed-form full conditionals against dense-matrix formulas
2. V recovery reproduces V beta exactly
3. The log-scale random walk and each block draw target the right density
4. run_chain bookkeeping: burn-in, thinning, acceptance, naive variant
5. Reproducibility across seeds, worker counts and chain files
6. Successive-conditional sweeps reproduce the prior margins
"""
import os
import sys
import math
import shutil
import tempfile
import unittest
from pathlib import Path

import numpy as np
from scipy import integrate

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.correlation.kernels import KernelKind
from core.data.dataset import build_dataset
from core.mcmc import blocks
from core.mcmc.blocks import ChainState
from core.mcmc.chain_io import read_chain, write_chain
from core.mcmc.sampler import (SamplerConfig, StepSizeAdapter, chain_inits, initial_latent, run_chain,
                               run_chains, successive_conditional_sweeps)
from core.model import Hyperparams, LatentState, ModelContext, Params, param_names, sample_prior
from core.prediction import PredictionRequest, predict_at
from core.stats import gig_mean, gig_variance
from core.stats.rng import make_rng


def toy_dataset(n=12, seed=1, error_prone=True):
    rng = np.random.default_rng(seed)
    coords = rng.uniform(0, 10, (n, 2))
    x = rng.normal(3.0, 0.5, n)
    y = 0.5 + 2.0 * x + rng.normal(size=n)
    return build_dataset(coords, y, x.reshape(-1, 1), error_mask=[error_prone], names=["mu"])


def toy_state(data, seed=2):
    rng = np.random.default_rng(seed)
    v = np.zeros((data.n, data.p))
    v[:, data.error_mask] = rng.normal(size=(data.n, int(data.error_mask.sum())))
    params = Params(beta=[0.5, 2.0], sigma2=1.2, omega2=0.8, tau2=0.15, theta=(1.5,))
    return ChainState.from_(params, LatentState(rng.normal(size=data.n), v))


class ConditionalTests(unittest.TestCase):
    """Gibbs full conditionals"""

    def setUp(self):
        self.data = toy_dataset()
        self.ctx = ModelContext.build(self.data, "exponential")
        self.state = toy_state(self.data)
        self.hyper = Hyperparams()

    def test_epsilon_moments(self):
        s = self.state
        c = self.ctx.corr(s.theta)
        z = (self.data.y - self.data.mu @ s.beta - s.sigma * s.tau * (s.v @ s.beta)) / s.sigma
        precision = np.linalg.inv(c) + np.eye(self.data.n) / s.omega2
        mean, prec, _ = blocks.epsilon_moments(s, self.ctx)
        np.testing.assert_allclose(prec, precision, rtol=1e-8, atol=1e-8)
        np.testing.assert_allclose(mean, np.linalg.solve(precision, z / s.omega2), rtol=1e-7, atol=1e-9)

    def test_beta_moments(self):
        s = self.state
        t_star = self.data.mu + s.sigma * s.tau * s.v
        t = self.data.y - s.sigma * s.epsilon
        scale = s.sigma2 * s.omega2
        precision = t_star.T @ t_star / scale + np.eye(2) / self.hyper.c1
        mean, prec, _ = blocks.beta_moments(s, self.ctx, self.hyper)
        np.testing.assert_allclose(prec, precision, rtol=1e-10)
        np.testing.assert_allclose(mean, np.linalg.solve(precision, t_star.T @ t / scale), rtol=1e-8)

    def test_v_moments(self):
        s = self.state
        a2, r_star, bb = blocks.v_moments(s, self.ctx)
        self.assertEqual(bb, 4.0)
        self.assertAlmostEqual(a2, s.tau2 / s.omega2 + 0.25)
        r = (self.data.y - self.data.mu @ s.beta - s.sigma * s.epsilon) / (s.sigma * s.tau)
        np.testing.assert_allclose(r_star, s.tau2 / s.omega2 * r)

    def test_omega2_conditional(self):
        s = self.state
        gig = blocks.omega2_conditional(s, self.ctx, self.hyper)
        d = (self.data.y - self.data.mu @ s.beta - s.sigma * s.epsilon - s.sigma * s.tau * (s.v @ s.beta))
        self.assertAlmostEqual(gig.gamma, self.hyper.gamma_gig - self.data.n / 2.0)
        self.assertAlmostEqual(gig.a ** 2, self.hyper.c4 ** 2 + d @ d / s.sigma2)
        self.assertEqual(gig.b, self.hyper.c5)

    def test_v_skipped_when_coefficients_vanish(self):
        self.state.beta = np.array([0.5, 0.0])
        v, updated = blocks.sample_v(self.state, self.ctx, make_rng(0))
        self.assertFalse(updated)
        self.assertIs(v, self.state.v)

    def test_naive_state_drops_v_and_tau(self):
        s = ChainState.from_(Params(beta=[0, 1], sigma2=1, omega2=1, tau2=0.3, theta=(1.0,)),
                             LatentState(np.zeros(3), np.column_stack([np.zeros(3), np.ones(3)])),
                             naive=True)
        self.assertEqual(s.tau2, 0.0)
        self.assertFalse(s.v.any())


class RecoverVTests(unittest.TestCase):
    """Solving V beta = w for V"""

    def setUp(self):
        self.w = np.random.default_rng(3).normal(size=7)
        self.beta = np.array([1.0, 2.0, -0.5, 0.7])
        self.mask = np.array([False, True, True, False])

    def test_min_norm(self):
        v = blocks.recover_v(self.w, self.beta, self.mask)
        np.testing.assert_allclose(v @ self.beta, self.w, atol=1e-12)
        np.testing.assert_array_equal(v[:, ~self.mask], 0.0)

    def test_conditional(self):
        v = blocks.recover_v(self.w, self.beta, self.mask, make_rng(4), mode="conditional")
        np.testing.assert_allclose(v @ self.beta, self.w, atol=1e-12)
        np.testing.assert_array_equal(v[:, ~self.mask], 0.0)
        self.assertFalse(np.allclose(v, blocks.recover_v(self.w, self.beta, self.mask)))

    def test_unknown_mode(self):
        with self.assertRaises(ValueError):
            blocks.recover_v(self.w, self.beta, self.mask, mode="exact")


class RandomWalkTests(unittest.TestCase):
    """Log-scale Metropolis step"""

    def test_targets_gamma_density(self):
        # Gamma(shape=3, rate=2): mean 1.5
        log_target = lambda x: 2.0 * math.log(x) - 2.0 * x
        rng = make_rng(10)
        x, draws = 1.0, []
        for _ in range(30000):
            x, _ = blocks.rw_log_step(x, log_target, 0.8, rng)
            draws.append(x)
        self.assertAlmostEqual(float(np.mean(draws[2000:])), 1.5, delta=0.06)

    def test_ratio_includes_jacobian(self):
        flat = lambda x: 0.0
        self.assertAlmostEqual(blocks.mh_log_ratio(1.0, math.e, flat), 1.0)

    def test_adapter_moves_toward_target(self):
        adapter = StepSizeAdapter({"sigma2": 0.3}, target=0.35)
        for _ in range(50):
            adapter.update("sigma2", True)
        self.assertGreater(adapter.step("sigma2"), 0.3)
        adapter.freeze()
        frozen = adapter.step("sigma2")
        adapter.update("sigma2", False)
        self.assertEqual(adapter.step("sigma2"), frozen)


class BlockDrawTests(unittest.TestCase):
    """Single draws from each block of the sweep"""

    def setUp(self):
        self.data = toy_dataset()
        self.ctx = ModelContext.build(self.data, "exponential")
        self.state = toy_state(self.data)
        self.hyper = Hyperparams()

    def test_epsilon_draws(self):
        rng = make_rng(31)
        mean, precision, _ = blocks.epsilon_moments(self.state, self.ctx)
        draws = np.array([blocks.sample_epsilon(self.state, self.ctx, rng) for _ in range(3000)])
        se = np.sqrt(np.diag(np.linalg.inv(precision)) / 3000)
        np.testing.assert_array_less(np.abs(draws.mean(axis=0) - mean), 4.5 * se)

    def test_beta_draws(self):
        rng = make_rng(32)
        mean, precision, _ = blocks.beta_moments(self.state, self.ctx, self.hyper)
        draws = np.array([blocks.sample_beta(self.state, self.ctx, self.hyper, rng) for _ in range(3000)])
        cov = np.linalg.inv(precision)
        np.testing.assert_array_less(np.abs(draws.mean(axis=0) - mean), 4.5 * np.sqrt(np.diag(cov) / 3000))
        np.testing.assert_allclose(np.cov(draws.T), cov, rtol=0.12)

    def test_omega2_draws(self):
        rng = make_rng(33)
        law = blocks.omega2_conditional(self.state, self.ctx, self.hyper)
        draws = np.array([blocks.sample_omega2(self.state, self.ctx, self.hyper, rng) for _ in range(4000)])
        self.assertTrue(np.all(draws > 0))
        self.assertLess(abs(draws.mean() - gig_mean(law)), 4.5 * math.sqrt(gig_variance(law) / 4000))

    def _target_mean(self, log_target):
        grid = np.geomspace(1e-4, 100.0, 4000)
        values = np.array([log_target(x) for x in grid])
        mode, top = grid[np.argmax(values)], values.max()
        f = lambda x: math.exp(log_target(x) - top)
        lo, hi = mode / 50.0, mode * 50.0
        mass = integrate.quad(f, lo, hi, points=[mode], limit=200)[0]
        first = integrate.quad(lambda x: x * f(x), lo, hi, points=[mode], limit=200)[0]
        return first / mass

    def _chain_mean(self, step, attr, seed, n=20000):
        rng = make_rng(seed)
        values = []
        for _ in range(n):
            value, accepted = step(self.state, self.ctx, self.hyper, 0.5, rng)
            self.assertIsInstance(accepted, bool)
            setattr(self.state, attr, value)
            values.append(value)
        return float(np.mean(values[2000:]))

    def test_sigma2_step_targets_conditional(self):
        expected = self._target_mean(lambda s2: blocks.log_target_sigma2(s2, self.state, self.ctx, self.hyper))
        observed = self._chain_mean(blocks.mh_sigma2, "sigma2", seed=34)
        self.assertAlmostEqual(observed / expected, 1.0, delta=0.05)

    def test_tau2_step_targets_conditional(self):
        expected = self._target_mean(lambda t2: blocks.log_target_tau2(t2, self.state, self.ctx, self.hyper))
        observed = self._chain_mean(blocks.mh_tau2, "tau2", seed=35)
        self.assertAlmostEqual(observed / expected, 1.0, delta=0.05)

    def test_theta_step(self):
        theta, accepted = blocks.mh_theta(self.state, self.ctx, self.hyper, [0.0], make_rng(36))
        self.assertEqual((theta, accepted), (self.state.theta, [False]))

        rng, flags = make_rng(37), []
        for _ in range(200):
            theta, accepted = blocks.mh_theta(self.state, self.ctx, self.hyper, [0.5], rng)
            self.state.theta = theta
            flags.extend(accepted)
            self.assertTrue(theta[0] > 0)
        self.assertTrue(0 < np.mean(flags) < 1)

    def test_theta_chain_targets_conditional(self):
        target = lambda t: blocks.log_target_theta((t,), self.state.epsilon, self.ctx, self.hyper)[0]
        grid = np.geomspace(1e-3, 200.0, 3000)
        values = np.array([target(t) for t in grid])
        mode, top = grid[np.argmax(values)], values.max()
        f = lambda t: math.exp(target(t) - top)
        mass = integrate.quad(f, 1e-8, 200.0, points=[mode], limit=400)[0]
        expected = integrate.quad(lambda t: t * f(t), 1e-8, 200.0, points=[mode], limit=400)[0] / mass

        rng, draws = make_rng(39), []
        for _ in range(40000):
            theta, _ = blocks.mh_theta(self.state, self.ctx, self.hyper, [1.0], rng)
            self.state.theta = theta
            draws.append(theta[0])
        self.assertAlmostEqual(float(np.mean(draws[2000:])) / expected, 1.0, delta=0.08)

    def test_v_draws_match_conditional(self):
        rng = make_rng(40)
        a2, r_star, _ = blocks.v_moments(self.state, self.ctx)
        w = []
        for _ in range(4000):
            v, updated = blocks.sample_v(self.state, self.ctx, rng)
            self.assertTrue(updated)
            np.testing.assert_array_equal(v[:, ~self.data.error_mask], 0.0)
            w.append(v @ self.state.beta)
        w = np.array(w)
        se = math.sqrt(1.0 / (a2 * 4000))
        np.testing.assert_array_less(np.abs(w.mean(axis=0) - r_star / a2), 4.5 * se)
        np.testing.assert_allclose(w.var(axis=0, ddof=1), 1.0 / a2, rtol=0.12)

    def test_theta_step_matern(self):
        ctx = ModelContext.build(self.data, "matern")
        self.state.theta = (1.5, 1.0)
        theta, accepted = blocks.mh_theta(self.state, ctx, self.hyper, [0.4, 0.4], make_rng(38))
        self.assertEqual(len(theta), 2)
        self.assertEqual(len(accepted), 2)


class SamplerConfigTests(unittest.TestCase):
    """Sampler settings"""

    def test_validation(self):
        with self.assertRaises(ValueError):
            SamplerConfig(n_iter=10, burn_in=10)
        with self.assertRaises(ValueError):
            SamplerConfig(thin=0)
        with self.assertRaises(ValueError):
            SamplerConfig(mh_step_sizes={"beta": 0.1})
        with self.assertRaises(ValueError):
            SamplerConfig(v_recovery="exact")

    def test_kept_draws(self):
        config = SamplerConfig(n_iter=75000, burn_in=25000, thin=10, mh_step_sizes={"tau2": 0.2})
        self.assertEqual(config.n_kept, 5000)
        self.assertEqual(config.mh_step_sizes["tau2"], 0.2)
        self.assertEqual(config.mh_step_sizes["sigma2"], 0.3)


class RunChainTests(unittest.TestCase):
    """End-to-end chains on a small dataset"""

    def setUp(self):
        self.data = toy_dataset()
        self.hyper = Hyperparams()
        self.config = SamplerConfig(n_iter=60, burn_in=20, thin=2, seed=5, progress_every=0)
        self.base = Params(beta=[1.5, 3.0], sigma2=2.8, omega2=3.0, tau2=0.1, theta=(5.0,))
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def _run(self, config=None):
        config = config or self.config
        inits = chain_inits(self.base, self.data, config)
        return run_chains(self.data, KernelKind.EXPONENTIAL, self.hyper, inits, config)

    def test_burn_in_and_thinning(self):
        chain = self._run()[0]
        self.assertEqual(len(chain), 20)
        np.testing.assert_array_equal(chain.iterations, np.arange(22, 61, 2))
        self.assertEqual(chain.epsilon.shape, (20, self.data.n))
        self.assertEqual(chain.v.shape, (20, self.data.n, 2))
        self.assertEqual(chain.names, ["beta_0", "beta_1", "sigma2", "omega2", "tau2", "theta_1"])
        self.assertTrue(np.all(chain.column("sigma2") > 0))
        self.assertTrue(np.all(chain.column("omega2") > 0))
        for block in ("sigma2", "tau2", "theta_1"):
            self.assertGreaterEqual(chain.acceptance_rates[block], 0.0)
            self.assertLessEqual(chain.acceptance_rates[block], 1.0)

    def test_v_beta_consistent_with_error_prone_mask(self):
        chain = self._run()[0]
        np.testing.assert_array_equal(chain.v[:, :, 0], 0.0)

    def test_naive_variant(self):
        chain = self._run(self.config.with_(naive=True))[0]
        np.testing.assert_array_equal(chain.column("tau2"), 0.0)
        self.assertFalse(chain.v.any())
        self.assertNotIn("tau2", chain.acceptance_rates)

    def test_same_seed_same_chain(self):
        np.testing.assert_array_equal(self._run()[0].params, self._run()[0].params)

    def test_workers_do_not_change_draws(self):
        serial = self._run(self.config.with_(n_chains=3, workers=1))
        pooled = self._run(self.config.with_(n_chains=3, workers=3))
        for a, b in zip(serial, pooled):
            np.testing.assert_array_equal(a.params, b.params)
            np.testing.assert_array_equal(a.epsilon, b.epsilon)

    def test_first_chain_starts_at_base(self):
        inits = chain_inits(self.base, self.data, self.config.with_(n_chains=3))
        self.assertIs(inits[0][0], self.base)
        self.assertFalse(np.array_equal(inits[1][0].as_vector(), self.base.as_vector()))

    def test_chain_init_independent_of_chain_count(self):
        two = chain_inits(self.base, self.data, self.config.with_(n_chains=2))
        four = chain_inits(self.base, self.data, self.config.with_(n_chains=4))
        np.testing.assert_array_equal(two[1][0].as_vector(), four[1][0].as_vector())
        np.testing.assert_array_equal(two[1][1].epsilon, four[1][1].epsilon)
        np.testing.assert_array_equal(two[1][1].v, four[1][1].v)
        self.assertFalse(np.array_equal(four[2][0].as_vector(), four[3][0].as_vector()))

    def test_matern_kernel(self):
        base = self.base.with_(theta=(5.0, 1.0))
        inits = chain_inits(base, self.data, self.config)
        chain = run_chains(self.data, KernelKind.MATERN, self.hyper, inits, self.config)[0]
        self.assertIn("theta_2", chain.names)
        self.assertTrue(np.all(chain.column("theta_2") > 0))

    def test_theta_arity_checked(self):
        init = (self.base.with_(theta=(5.0, 1.0)), initial_latent(self.data.n, self.data.error_mask, make_rng(1)))
        with self.assertRaises(ValueError):
            run_chain(self.data, KernelKind.EXPONENTIAL, self.hyper, init, self.config)

    def test_chain_files_reload_and_are_byte_stable(self):
        chain = self._run()[0]
        first = Path(self.temp_dir) / "a"
        second = Path(self.temp_dir) / "b"
        paths = write_chain(chain, first)
        write_chain(self._run()[0], second)
        for p in paths:
            self.assertEqual(p.read_bytes(), (second / p.name).read_bytes(), msg=p.name)

        back = read_chain(paths[0])
        np.testing.assert_array_equal(back.params, chain.params)
        np.testing.assert_array_equal(back.epsilon, chain.epsilon)
        np.testing.assert_array_equal(back.v, chain.v)
        self.assertIs(back.kind, KernelKind.EXPONENTIAL)
        self.assertEqual(back.config, chain.config)

    def test_reloaded_chain_predicts_identically(self):
        chain = self._run()[0]
        back = read_chain(write_chain(chain, Path(self.temp_dir) / "c")[0])
        np.testing.assert_array_equal(back.params, chain.params)
        sites = np.array([[0.35, 0.65], [0.8, 0.15]])
        req = PredictionRequest(sites, np.array([[1.0, 2.5], [1.0, 3.5]]))
        fresh = predict_at(chain, self.data, KernelKind.EXPONENTIAL, req, make_rng(6))
        reloaded = predict_at(back, self.data, KernelKind.EXPONENTIAL, req, make_rng(6))
        np.testing.assert_array_equal(reloaded.mean, fresh.mean)
        np.testing.assert_array_equal(reloaded.sd, fresh.sd)


class RecoveryTests(unittest.TestCase):
    """Posterior concentrates near the generating coefficients"""

    def test_slope_recovered_without_measurement_error(self):
        data = toy_dataset(n=60, seed=11, error_prone=False)
        config = SamplerConfig(n_iter=1500, burn_in=500, thin=2, seed=3, progress_every=0)
        base = Params(beta=[0.0, 1.0], sigma2=1.0, omega2=1.0, tau2=0.0, theta=(2.0,))
        inits = chain_inits(base, data, config)
        chain = run_chains(data, "exponential", Hyperparams(), inits, config)[0]
        self.assertAlmostEqual(float(chain.column("beta_1").mean()), 2.0, delta=0.75)


class SuccessiveConditionalTests(unittest.TestCase):
    """Prior-reproduction simulator"""

    def test_shape_and_support(self):
        data = toy_dataset(n=5)
        hyper = Hyperparams(c1=1.0, c2=3.0, c3=2.0, c4=1.0, c5=1.5, c6=0.5, c7=1.5, gamma_gig=1.0)
        out = successive_conditional_sweeps(data, "exponential", hyper, 40, make_rng(6))
        self.assertEqual(out.shape, (40, 6))
        self.assertTrue(np.all(np.isfinite(out)))
        self.assertTrue(np.all(out[:, 2:] > 0))

    def test_sweeps_reproduce_prior_margins(self):
        # prior CDF of each recorded draw is uniform when every conditional is right
        data = build_dataset(np.array([[0.0, 0.0], [1.0, 0.3], [0.4, 1.2], [1.6, 1.1], [0.9, 2.0]]),
                             np.zeros(5), np.array([[0.5], [-1.0], [1.3], [0.2], [-0.4]]))
        hyper = Hyperparams(c1=1.0, c2=3.0, c3=2.0, c4=1.0, c5=1.5, c6=0.5, c7=1.5, gamma_gig=1.0)
        rng = make_rng(12)
        draws = successive_conditional_sweeps(data, "exponential", hyper, 6200, rng)[200:]
        med_d = ModelContext.build(data, "exponential").med_d
        prior = np.array([sample_prior(hyper, data.p, 1, med_d, rng).as_vector() for _ in range(20000)])
        batches = 30
        for j, name in enumerate(param_names(data.p, 1)):
            u = np.searchsorted(np.sort(prior[:, j]), draws[:, j]) / len(prior)
            means = u.reshape(batches, -1).mean(axis=1)
            se = means.std(ddof=1) / math.sqrt(batches)
            self.assertLess(abs(means.mean() - 0.5), max(4.5 * se, 0.02), name)


if __name__ == "__main__":
    unittest.main()

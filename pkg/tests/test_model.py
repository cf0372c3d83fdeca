"""
Model core tests: parameters, likelihoods and priors

These tests verify:
1. Parameter containers validate their ranges and flatten in column order
2. The marginal likelihood equals a dense multivariate normal log-density
3. The conditional likelihood is white noise around the working residual
4. Log-priors agree with scipy densities and prior draws respect supports
"""
import os
import sys
import math
import unittest

import numpy as np
from scipy import stats

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.correlation.kernels import KernelKind, KernelSpec, build_corr_matrix
from core.data.dataset import build_dataset
from core.data.distances import pairwise_distances
from core.model import (Hyperparams, LatentState, ModelContext, Params, conditional_loglik,
                        log_prior, log_prior_components, marginal_covariance, marginal_loglik,
                        masked_beta_sq, param_names, sample_prior, working_residual)
from core.stats.rng import make_rng


def small_dataset(n=8, seed=0):
    rng = np.random.default_rng(seed)
    coords = rng.uniform(0, 10, (n, 2))
    cov = rng.normal(3.0, 0.5, (n, 2))
    y = 0.5 + 2.0 * cov[:, 0] - cov[:, 1] + rng.normal(size=n)
    return build_dataset(coords, y, cov, error_mask=[True, False], names=["mu", "z"])


class ParamsTests(unittest.TestCase):
    """Parameter containers"""

    def setUp(self):
        self.params = Params(beta=[0.5, 2.0, -1.0], sigma2=1.0, omega2=1.1, tau2=0.1, theta=(1.2,))

    def test_vector_order_matches_names(self):
        self.assertEqual(param_names(3, 1), ["beta_0", "beta_1", "beta_2", "sigma2", "omega2", "tau2", "theta_1"])
        np.testing.assert_array_equal(self.params.as_vector(), [0.5, 2.0, -1.0, 1.0, 1.1, 0.1, 1.2])
        back = Params.from_vector(self.params.as_vector(), 3)
        np.testing.assert_array_equal(back.beta, self.params.beta)
        self.assertEqual(back.theta, (1.2,))
        self.assertEqual(self.params.as_dict()["tau2"], 0.1)

    def test_derived_scales(self):
        p = self.params.with_(sigma2=4.0, tau2=0.25)
        self.assertEqual(p.sigma, 2.0)
        self.assertEqual(p.tau, 0.5)
        self.assertEqual(p.kernel("exponential"), KernelSpec.exponential(1.2))

    def test_ranges(self):
        with self.assertRaises(ValueError):
            self.params.with_(sigma2=0.0)
        with self.assertRaises(ValueError):
            self.params.with_(omega2=-0.1)
        with self.assertRaises(ValueError):
            self.params.with_(theta=(0.0,))
        # the naive model and a vanishing nugget are legal
        self.params.with_(tau2=0.0, omega2=0.0)

    def test_latent_intercept_column_is_zero(self):
        with self.assertRaises(ValueError):
            LatentState(np.zeros(3), np.ones((3, 2)))
        state = LatentState.zeros(3, 2)
        self.assertEqual(state.v.shape, (3, 2))

    def test_hyperparams_positive(self):
        with self.assertRaises(ValueError):
            Hyperparams(c3=0.0)
        self.assertEqual(Hyperparams().with_(c1=9.0).c1, 9.0)
        self.assertEqual(Hyperparams().as_dict()["gamma_gig"], 0.001)


class LikelihoodTests(unittest.TestCase):
    """Marginal and conditional likelihoods"""

    def setUp(self):
        self.data = small_dataset()
        self.params = Params(beta=[0.5, 2.0, -1.0], sigma2=1.3, omega2=0.7, tau2=0.2, theta=(2.0,))

    def _dense(self, params, kernel):
        c = build_corr_matrix(pairwise_distances(self.data.coords), kernel)
        b = params.beta[self.data.error_mask]
        cov = params.sigma2 * (c + (params.omega2 + params.tau2 * float(b @ b)) * np.eye(self.data.n))
        return stats.multivariate_normal(self.data.mu @ params.beta, cov).logpdf(self.data.y)

    def test_marginal_matches_dense_normal(self):
        expected = self._dense(self.params, KernelSpec.exponential(2.0))
        self.assertAlmostEqual(marginal_loglik(self.params, self.data, "exponential"), expected, places=8)

    def test_marginal_matern(self):
        params = self.params.with_(theta=(2.0, 1.5))
        expected = self._dense(params, KernelSpec.matern(2.0, 1.5))
        self.assertAlmostEqual(marginal_loglik(params, self.data, KernelKind.MATERN), expected, places=8)

    def test_only_error_prone_coefficients_enter_nugget(self):
        self.assertEqual(masked_beta_sq(self.params, self.data), 4.0)
        ctx = ModelContext.build(self.data, "exponential")
        cov = marginal_covariance(self.params, ctx)
        c = ctx.corr((2.0,))
        np.testing.assert_allclose(np.diag(cov), 1.3 * (1.0 + 0.7 + 0.2 * 4.0))
        np.testing.assert_allclose(cov[0, 1], 1.3 * c[0, 1])

    def test_naive_is_tau_zero(self):
        naive = self.params.with_(tau2=0.0)
        expected = self._dense(naive, KernelSpec.exponential(2.0))
        self.assertAlmostEqual(marginal_loglik(naive, self.data, "exponential"), expected, places=8)

    def test_conditional_is_white_noise(self):
        rng = np.random.default_rng(4)
        v = np.zeros((self.data.n, 3))
        v[:, 1] = rng.normal(size=self.data.n)
        latent = LatentState(rng.normal(size=self.data.n), v)
        d = working_residual(self.params, latent, self.data)
        expected = stats.norm(0.0, math.sqrt(1.3 * 0.7)).logpdf(d).sum()
        self.assertAlmostEqual(conditional_loglik(self.params, latent, self.data), expected, places=9)

    def test_conditional_needs_nugget(self):
        with self.assertRaises(ValueError):
            conditional_loglik(self.params.with_(omega2=0.0), LatentState.zeros(self.data.n, 3), self.data)


class PriorTests(unittest.TestCase):
    """Prior densities and draws"""

    def setUp(self):
        self.hyper = Hyperparams()
        self.params = Params(beta=[0.5, 2.0], sigma2=1.0, omega2=1.1, tau2=0.1, theta=(1.2,))
        self.med_d = 20.0

    def test_components_match_scipy(self):
        comps = log_prior_components(self.params, self.hyper, self.med_d)
        h = self.hyper
        self.assertAlmostEqual(comps["beta"], stats.norm(0, math.sqrt(h.c1)).logpdf([0.5, 2.0]).sum(), places=10)
        self.assertAlmostEqual(comps["sigma2"], stats.invgamma(h.c2, scale=h.c3).logpdf(1.0), places=10)
        omega = stats.geninvgauss(h.gamma_gig, h.c4 * h.c5, scale=h.c4 / h.c5)
        self.assertAlmostEqual(comps["omega2"], omega.logpdf(1.1), places=8)
        tau = stats.geninvgauss(0.0, h.c6 * h.c7, scale=h.c6 / h.c7)
        self.assertAlmostEqual(comps["tau2"], tau.logpdf(0.1), places=8)
        self.assertAlmostEqual(comps["theta_1"], stats.expon(scale=self.med_d / h.c8).logpdf(1.2), places=10)
        self.assertAlmostEqual(log_prior(self.params, h, self.med_d), sum(comps.values()), places=12)

    def test_naive_and_matern_components(self):
        comps = log_prior_components(self.params.with_(tau2=0.0, theta=(1.2, 0.8)), self.hyper, self.med_d)
        self.assertNotIn("tau2", comps)
        self.assertAlmostEqual(comps["theta_2"], stats.expon(scale=1.0 / self.hyper.c9).logpdf(0.8), places=10)

    def test_prior_draws(self):
        rng = make_rng(8)
        draws = [sample_prior(self.hyper, 2, 2, self.med_d, rng) for _ in range(200)]
        self.assertTrue(all(d.sigma2 > 0 and d.omega2 > 0 and d.tau2 > 0 for d in draws))
        self.assertTrue(all(len(d.theta) == 2 for d in draws))
        naive = sample_prior(self.hyper, 2, 1, self.med_d, rng, naive=True)
        self.assertEqual(naive.tau2, 0.0)
        theta = np.array([d.theta[0] for d in draws])
        # Exp(c8 / med_d) has mean med_d / c8 = 20
        self.assertAlmostEqual(theta.mean(), 20.0, delta=4.0)


if __name__ == "__main__":
    unittest.main()

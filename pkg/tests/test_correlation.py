"""
Correlation kernel and SPD linear algebra tests

These tests verify:
1. Exponential and Matern kernels against closed forms
2. Correlation matrices are symmetric with a unit diagonal
3. Cholesky factor, solves, log-determinant and failure reporting
"""
import os
import sys
import unittest

import numpy as np

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.correlation import (KernelKind, KernelSpec, build_corr_matrix, exponential_corr,
                              matern_corr, spd_factor, spd_inv_quad, spd_logdet, spd_solve)
from core.data.distances import pairwise_distances
from core.errors import NotPositiveDefiniteError


class KernelTests(unittest.TestCase):
    """Kernel values"""

    def setUp(self):
        self.h = np.array([0.0, 0.1, 0.5, 1.0, 2.5, 10.0])

    def test_exponential_closed_form(self):
        np.testing.assert_allclose(exponential_corr(self.h, 1.2), np.exp(-self.h / 1.2))
        self.assertEqual(exponential_corr(0.0, 3.0), 1.0)

    def test_matern_half_is_exponential(self):
        np.testing.assert_allclose(matern_corr(self.h, 1.2, 0.5), np.exp(-self.h / 1.2), rtol=1e-10)

    def test_matern_three_halves(self):
        u = self.h / 2.0
        np.testing.assert_allclose(matern_corr(self.h, 2.0, 1.5), (1.0 + u) * np.exp(-u), rtol=1e-10)

    def test_matern_unit_at_zero_and_underflows_far_away(self):
        self.assertEqual(matern_corr(0.0, 1.0, 2.5), 1.0)
        self.assertEqual(matern_corr(1e6, 1.0, 2.5), 0.0)

    def test_matern_tiny_distance_stays_bounded(self):
        value = matern_corr(1e-300, 1.0, 20.0)
        self.assertLessEqual(value, 1.0)
        self.assertGreater(value, 0.99)

    def test_monotone_decreasing(self):
        h = np.linspace(0.0, 20.0, 200)
        for values in (exponential_corr(h, 2.0), matern_corr(h, 2.0, 1.7)):
            self.assertTrue(np.all(np.diff(values) <= 0))

    def test_invalid_parameters(self):
        with self.assertRaises(ValueError):
            exponential_corr(self.h, 0.0)
        with self.assertRaises(ValueError):
            matern_corr(self.h, 1.0, -1.0)
        with self.assertRaises(ValueError):
            exponential_corr(-1.0, 1.0)

    def test_spec_validates_arity(self):
        with self.assertRaises(ValueError):
            KernelSpec(KernelKind.EXPONENTIAL, (1.0, 2.0))
        with self.assertRaises(ValueError):
            KernelSpec("matern", (1.0,))
        spec = KernelSpec("matern", (1.0, 0.5))
        self.assertIs(spec.kind, KernelKind.MATERN)
        self.assertEqual(spec.n_params, 2)
        self.assertEqual(spec.with_theta((2.0, 0.5)).theta, (2.0, 0.5))


class CorrMatrixTests(unittest.TestCase):
    """Correlation matrices over a set of locations"""

    def setUp(self):
        coords = np.random.default_rng(3).uniform(0, 50, (40, 2))
        self.dist = pairwise_distances(coords)

    def test_symmetric_unit_diagonal_positive_definite(self):
        for spec in (KernelSpec.exponential(1.2), KernelSpec.matern(3.0, 1.5)):
            c = build_corr_matrix(self.dist, spec)
            np.testing.assert_array_equal(c, c.T)
            np.testing.assert_array_equal(np.diag(c), 1.0)
            self.assertGreater(np.linalg.eigvalsh(c).min(), 0.0)


class SpdTests(unittest.TestCase):
    """Cholesky-based solves"""

    def setUp(self):
        a = np.random.default_rng(7).normal(size=(6, 6))
        self.m = a @ a.T + 6.0 * np.eye(6)
        self.b = np.arange(6, dtype=float)

    def test_solve_logdet_and_quadratic_form(self):
        f = spd_factor(self.m)
        np.testing.assert_allclose(f.lower @ f.lower.T, self.m, rtol=1e-12)
        np.testing.assert_allclose(spd_solve(f, self.b), np.linalg.solve(self.m, self.b), rtol=1e-10)
        self.assertAlmostEqual(spd_logdet(f), np.linalg.slogdet(self.m)[1], places=10)
        self.assertAlmostEqual(spd_inv_quad(f, self.b), self.b @ np.linalg.solve(self.m, self.b), places=9)

    def test_matrix_right_hand_side(self):
        f = spd_factor(self.m)
        np.testing.assert_allclose(spd_solve(f, np.eye(6)) @ self.m, np.eye(6), atol=1e-10)

    def test_indefinite_reports_pivot(self):
        with self.assertRaises(NotPositiveDefiniteError) as ctx:
            spd_factor(np.array([[1.0, 2.0], [2.0, 1.0]]))
        self.assertEqual(ctx.exception.pivot, 1)

    def test_near_singular_rejected(self):
        with self.assertRaises(NotPositiveDefiniteError) as ctx:
            spd_factor(np.array([[1.0, 1.0], [1.0, 1.0 + 1e-14]]))
        self.assertEqual(ctx.exception.pivot, 1)

    def test_non_finite_rejected(self):
        with self.assertRaises(NotPositiveDefiniteError):
            spd_factor(np.array([[np.nan, 0.0], [0.0, 1.0]]))

    def test_factor_is_read_only(self):
        f = spd_factor(self.m)
        with self.assertRaises(ValueError):
            f.lower[0, 0] = 0.0


if __name__ == "__main__":
    unittest.main()
